#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "uct/engine.hpp"

namespace uct::gmf {

// Reference transformation: migration of GMF 1.0 figure models to the 2.1
// structure. Actual figures become real figures referenced through figure
// descriptors; nested-figure labels gain explicit child-access objects.
// The metamodel unifies both versions so the migration can update in place:
// Figure1 is the 2.1 counterpart of Figure (abstract over RealFigure), and
// figures1 the 2.1 version of the gallery figure list.

inline constexpr const char* kMetamodelText = R"(
class Canvas {
  ref compartments : Compartment [*];
  ref nodes : Node [*];
  ref labels : DiagramLabel [*];
  ref figures : FigureGallery [*];
}
class FigureGallery {
  ref figures : Figure [*];
  ref figures1 : RealFigure [*];
  ref descriptors : FigureDescriptor [*];
}
class Figure {
  attr name : string key;
  ref children : Figure [*];
  ref referencingElements : DiagramElement [*];
}
abstract class Figure1 { }
class RealFigure extends Figure1 {
  attr name : string key;
  ref children : RealFigure [*];
}
class FigureDescriptor {
  ref actualFigure : RealFigure [1];
  ref accessors : ChildAccess [*];
}
class ChildAccess { }
abstract class DiagramElement {
  ref figure : FigureDescriptor [1];
}
class Node extends DiagramElement { }
class Compartment extends DiagramElement { }
class DiagramLabel extends DiagramElement {
  ref accessor : ChildAccess [1];
}
)";

// The construction use case builds the 2.1 data without deleting anything;
// the cleanup use case then removes the 1.0-only data. Within a constraint
// body, unqualified names are features of the scope instance (scope
// variable: Figure -> f, FigureGallery -> fg).
inline constexpr const char* kUseCasesText = R"(
usecase createTarget {
  assume Figure1 = {} ;
  assume FigureDescriptor = {} ;
  assume ChildAccess = {} ;

  // every figure gets a unique real figure, with a descriptor for it
  constraint C1 : Figure ::
    RealFigure->exists1( rf | rf.name = name &
      FigureDescriptor->exists1( fd | fd.actualFigure = rf ) ) ;

  // real figures mirror the children structure
  constraint C2 : Figure ::
    RealFigure[name].children = RealFigure[children.name] ;

  // galleries carry the corresponding real figures and their descriptors
  constraint C3 : FigureGallery ::
    figures1 = RealFigure[figures.name] &
    descriptors = FigureDescriptor->select( actualFigure : fg.figures1 ) ;

  // diagram elements point at the descriptor of their containing figure;
  // labels of nested figures get an explicit child access object
  constraint C4 : Figure ; fd : FigureDescriptor ; d : f.referencingElements ::
    fd.actualFigure = RealFigure[f.name] =>
      ( d.figure = fd &
        ( d : DiagramLabel =>
          ChildAccess->exists( ca | d.accessor = ca & ca : fd.accessors ) ) ) ;
}

usecase cleanup {
  constraint cleanModel : $global ::
    Figure@pre.referencingElements = {} &
    FigureGallery.figures = {} &
    Figure->isDeleted() ;
}
)";

inline constexpr const char* kExampleInputText =
    "c : Canvas\n"
    "c1 : Compartment\n"
    "c2 : Compartment\n"
    "c1 : c.compartments\n"
    "c2 : c.compartments\n"
    "n1 : Node\n"
    "n2 : Node\n"
    "n1 : c.nodes\n"
    "n2 : c.nodes\n"
    "l : DiagramLabel\n"
    "l : c.labels\n"
    "fg : FigureGallery\n"
    "fg : c.figures\n"
    "f1 : Figure\n"
    "f1.name = \"f1\"\n"
    "f2 : Figure\n"
    "f2.name = \"f2\"\n"
    "f2 : f1.children\n"
    "f1 : fg.figures\n"
    "l : f1.referencingElements\n"
    "n1 : f1.referencingElements\n"
    "c1 : f1.referencingElements\n"
    "n2 : f2.referencingElements\n"
    "c2 : f2.referencingElements\n";

inline constexpr const char* kExampleExpectedText =
    "c : Canvas\n"
    "c1 : Compartment\n"
    "c2 : Compartment\n"
    "c1 : c.compartments\n"
    "c2 : c.compartments\n"
    "n1 : Node\n"
    "n2 : Node\n"
    "n1 : c.nodes\n"
    "n2 : c.nodes\n"
    "l : DiagramLabel\n"
    "l : c.labels\n"
    "fg : FigureGallery\n"
    "fg : c.figures\n"
    "rf1 : RealFigure\n"
    "rf1.name = \"f1\"\n"
    "rf2 : RealFigure\n"
    "rf2.name = \"f2\"\n"
    "rf2 : rf1.children\n"
    "fd1 : FigureDescriptor\n"
    "fd1.actualFigure = rf1\n"
    "fd2 : FigureDescriptor\n"
    "fd2.actualFigure = rf2\n"
    "rf1 : fg.figures1\n"
    "fd1 : fg.descriptors\n"
    "l.figure = fd1\n"
    "n1.figure = fd1\n"
    "c1.figure = fd1\n"
    "n2.figure = fd2\n"
    "c2.figure = fd2\n"
    "ca : ChildAccess\n"
    "l.accessor = ca\n"
    "ca : fd1.accessors\n";

inline std::shared_ptr<const Metamodel> bundled_metamodel() {
  auto mm = std::make_shared<Metamodel>(parse_metamodel(kMetamodelText));
  return mm;
}

/// The two bundled use cases, in chain order.
inline std::pair<UseCase, UseCase> bundled_usecases(const Metamodel& mm) {
  auto ucs = parse_usecases(mm, kUseCasesText);
  if (ucs.size() != 2) throw Error("bundled use cases are malformed");
  return {std::move(ucs[0]), std::move(ucs[1])};
}

inline Chain bundled_chain() {
  Chain chain;
  chain.metamodel = bundled_metamodel();
  chain.usecases = parse_usecases(*chain.metamodel, kUseCasesText);
  return chain;
}

/// Runs the createTarget + cleanup chain on a model given as text and
/// returns the migrated model as text. File-mediated like the CLI: the
/// intermediate model is written out and re-parsed between the use cases.
inline std::string migrate(const std::string& input_text,
                           const RunOptions& options = {}) {
  namespace fs = std::filesystem;
  auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
  fs::path dir = fs::temp_directory_path() / ("uct_gmf_" + std::to_string(stamp));
  fs::create_directories(dir);
  fs::path in = dir / "input.txt";
  fs::path out = dir / "output.txt";
  write_file(in.string(), input_text);

  ChainOptions chain_options;
  static_cast<RunOptions&>(chain_options) = options;
  ChainResult result = execute_chain(bundled_chain(), in.string(), out.string(),
                                     chain_options);
  if (!result.ok) {
    std::string detail;
    for (const auto& r : result.reports) detail += r.to_text();
    std::error_code ec;
    fs::remove_all(dir, ec);
    throw Error("migration failed:\n" + detail);
  }
  std::string text = read_file(out.string());
  std::error_code ec;
  fs::remove_all(dir, ec);
  return text;
}

}  // namespace uct::gmf
