#pragma once

// Brute-force reference migrator and a random source-model generator for
// the figure-migration case. The migrator is written directly against the
// model store as plain nested loops; it shares no code with the constraint
// compiler, the expression evaluator, or the activity interpreter, so it
// can serve as an independent oracle for the engine's output.

#include <random>
#include <string>
#include <vector>

#include "test_util.hpp"
#include "uct/model.hpp"

namespace uct_test {

inline uct::ObjectId oracle_rf_by_name(const uct::Model& m, const uct::Value& name) {
  for (const uct::ObjectId& rf : m.extent("RealFigure"))
    if (*m.attr(rf, "name") == name) return rf;
  throw uct::Error("oracle: no RealFigure named " + name.to_string());
}

/// Construction followed by cleanup, as plain imperative code:
///   1. per figure: a real figure with the same name, with a descriptor
///   2. per figure: the real figure's children mirror the figure's children
///   3. per gallery: figures1/descriptors carry the corresponding new data
///   4. per (figure, descriptor, referencing element): set the element's
///      descriptor; labels get a child-access object
///   then: clear referencingElements and gallery figure lists, delete figures.
inline uct::Model oracle_migrate(const uct::Model& input) {
  uct::Model m = input.snapshot();
  const uct::Metamodel& mm = m.metamodel();

  // 1
  for (const uct::ObjectId& f : m.extent("Figure")) {
    uct::Value name = *m.attr(f, "name");
    uct::ObjectId rf{""};
    bool have_rf = false;
    for (const uct::ObjectId& cand : m.extent("RealFigure"))
      if (*m.attr(cand, "name") == name) {
        rf = cand;
        have_rf = true;
        break;
      }
    if (!have_rf) {
      rf = m.create_object("RealFigure");
      m.set_attr(rf, "name", name);
    }
    bool have_fd = false;
    for (const uct::ObjectId& fd : m.extent("FigureDescriptor"))
      if (m.ref(fd, "actualFigure") && *m.ref(fd, "actualFigure") == rf) {
        have_fd = true;
        break;
      }
    if (!have_fd) {
      uct::ObjectId fd = m.create_object("FigureDescriptor");
      m.set_ref(fd, "actualFigure", rf);
    }
  }

  // 2
  for (const uct::ObjectId& f : m.extent("Figure")) {
    uct::ObjectId rf = oracle_rf_by_name(m, *m.attr(f, "name"));
    m.clear_links(rf, "children");
    for (const uct::ObjectId& c : m.links(f, "children"))
      m.insert_link(rf, "children", oracle_rf_by_name(m, *m.attr(c, "name")));
  }

  // 3
  for (const uct::ObjectId& fg : m.extent("FigureGallery")) {
    m.clear_links(fg, "figures1");
    for (const uct::ObjectId& f : m.links(fg, "figures"))
      m.insert_link(fg, "figures1", oracle_rf_by_name(m, *m.attr(f, "name")));
    m.clear_links(fg, "descriptors");
    for (const uct::ObjectId& fd : m.extent("FigureDescriptor")) {
      auto rf = m.ref(fd, "actualFigure");
      if (!rf) continue;
      const auto& in_gallery = m.links(fg, "figures1");
      if (std::find(in_gallery.begin(), in_gallery.end(), *rf) != in_gallery.end())
        m.insert_link(fg, "descriptors", fd);
    }
  }

  // 4
  for (const uct::ObjectId& f : m.extent("Figure")) {
    uct::ObjectId rf = oracle_rf_by_name(m, *m.attr(f, "name"));
    for (const uct::ObjectId& fd : m.extent("FigureDescriptor")) {
      auto actual = m.ref(fd, "actualFigure");
      if (!actual || !(*actual == rf)) continue;
      for (const uct::ObjectId& d : m.links(f, "referencingElements")) {
        m.set_ref(d, "figure", fd);
        if (uct::is_subtype(mm, m.class_of(d), "DiagramLabel")) {
          bool found = false;
          for (const uct::ObjectId& ca : m.extent("ChildAccess")) {
            auto acc = m.ref(d, "accessor");
            const auto& accessors = m.links(fd, "accessors");
            if (acc && *acc == ca &&
                std::find(accessors.begin(), accessors.end(), ca) != accessors.end()) {
              found = true;
              break;
            }
          }
          if (!found) {
            uct::ObjectId ca = m.create_object("ChildAccess");
            m.set_ref(d, "accessor", ca);
            m.insert_link(fd, "accessors", ca);
          }
        }
      }
    }
  }

  // cleanup
  for (const uct::ObjectId& f : m.extent("Figure"))
    m.clear_links(f, "referencingElements");
  for (const uct::ObjectId& fg : m.extent("FigureGallery")) m.clear_links(fg, "figures");
  for (const uct::ObjectId& f : m.extent("Figure")) m.delete_object(f);
  return m;
}

/// Random source model: up to 5 figures (names drawn from a small pool, so
/// collisions happen), up to 6 diagram elements, up to 2 galleries, random
/// children / gallery membership / referencingElements links.
inline uct::Model random_source_model(unsigned seed) {
  std::mt19937 rng(seed);
  auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
  uct::Model m(gmf_mm());

  int n_fig = pick(6);
  static const char* name_pool[] = {"a", "b", "c", "d"};
  std::vector<uct::ObjectId> figs;
  for (int i = 0; i < n_fig; ++i) {
    uct::ObjectId f = m.create_object("Figure");
    m.set_attr(f, "name", uct::Value(std::string(name_pool[pick(4)])));
    figs.push_back(f);
  }
  for (const uct::ObjectId& f : figs)
    for (const uct::ObjectId& c : figs)
      if (pick(4) == 0) m.insert_link(f, "children", c);

  int n_el = pick(7);
  static const char* el_classes[] = {"Node", "Compartment", "DiagramLabel"};
  std::vector<uct::ObjectId> elems;
  for (int i = 0; i < n_el; ++i) elems.push_back(m.create_object(el_classes[pick(3)]));
  for (const uct::ObjectId& f : figs)
    for (const uct::ObjectId& d : elems)
      if (pick(3) == 0) m.insert_link(f, "referencingElements", d);

  int n_gal = pick(3);
  for (int i = 0; i < n_gal; ++i) {
    uct::ObjectId fg = m.create_object("FigureGallery");
    for (const uct::ObjectId& f : figs)
      if (pick(2) == 0) m.insert_link(fg, "figures", f);
  }

  if (pick(2) == 0 && !elems.empty()) {
    uct::ObjectId canvas = m.create_object("Canvas");
    for (const uct::ObjectId& d : elems) {
      const std::string& cls = m.class_of(d);
      if (cls == "Node") m.insert_link(canvas, "nodes", d);
      else if (cls == "Compartment") m.insert_link(canvas, "compartments", d);
      else m.insert_link(canvas, "labels", d);
    }
    for (const uct::ObjectId& fg : m.extent("FigureGallery"))
      m.insert_link(canvas, "figures", fg);
  }
  return m;
}

}  // namespace uct_test
