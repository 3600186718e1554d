#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "uct/lexer.hpp"
#include "uct/value.hpp"

namespace uct {

enum class AttrKind { String, Integer, Real, Boolean };

inline const char* attr_kind_name(AttrKind k) {
  switch (k) {
    case AttrKind::String: return "string";
    case AttrKind::Integer: return "integer";
    case AttrKind::Real: return "real";
    case AttrKind::Boolean: return "boolean";
  }
  return "?";
}

struct AttributeDef {
  std::string name;
  AttrKind kind = AttrKind::String;
  bool is_key = false;
};

enum class Upper { One, Many };

/// Association end. Many-ends behave as ordered, duplicate-free sequences.
struct RoleDef {
  std::string name;
  std::string target_class;
  Upper upper = Upper::Many;
  bool ordered = true;
};

struct ClassDef {
  std::string name;
  bool is_abstract = false;
  // Parsed leniently as a list; validate() rejects more than one entry.
  std::vector<std::string> superclasses;
  std::vector<AttributeDef> attributes;
  std::vector<RoleDef> roles;

  std::optional<std::string> superclass() const {
    if (superclasses.empty()) return std::nullopt;
    return superclasses.front();
  }
};

using Feature = std::variant<const AttributeDef*, const RoleDef*>;

/// A class model: the language instance models must conform to.
/// Immutable once parsed; safe to share across threads.
class Metamodel {
 public:
  void add_class(ClassDef c) {
    if (index_.count(c.name)) throw Error("duplicate class " + c.name);
    index_[c.name] = classes_.size();
    classes_.push_back(std::move(c));
  }

  bool has(const std::string& name) const { return index_.count(name) != 0; }

  const ClassDef* find(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? nullptr : &classes_[it->second];
  }

  const ClassDef& at(const std::string& name) const {
    const ClassDef* c = find(name);
    if (!c) throw Error("unknown class " + name);
    return *c;
  }

  const std::vector<ClassDef>& classes() const { return classes_; }

  /// Superclass chain starting at `name` itself, walking upward.
  std::vector<const ClassDef*> ancestors(const std::string& name) const {
    std::vector<const ClassDef*> chain;
    std::set<std::string> seen;
    const ClassDef* c = &at(name);
    while (c) {
      if (!seen.insert(c->name).second)
        throw Error("inheritance cycle involving class " + c->name);
      chain.push_back(c);
      auto sup = c->superclass();
      c = sup ? &at(*sup) : nullptr;
    }
    return chain;
  }

  /// Owned and inherited features, root class first (stable declaration order).
  std::vector<Feature> flattened_features(const std::string& name) const {
    auto chain = ancestors(name);
    std::vector<Feature> out;
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
      for (const auto& a : (*it)->attributes) out.push_back(&a);
      for (const auto& r : (*it)->roles) out.push_back(&r);
    }
    return out;
  }

  const AttributeDef* find_attribute(const std::string& cls, const std::string& feature) const {
    for (const ClassDef* c : ancestors(cls))
      for (const auto& a : c->attributes)
        if (a.name == feature) return &a;
    return nullptr;
  }

  const RoleDef* find_role(const std::string& cls, const std::string& feature) const {
    for (const ClassDef* c : ancestors(cls))
      for (const auto& r : c->roles)
        if (r.name == feature) return &r;
    return nullptr;
  }

  /// The class in the superclass chain that declares `feature`.
  std::string declaring_class(const std::string& cls, const std::string& feature) const {
    for (const ClassDef* c : ancestors(cls)) {
      for (const auto& a : c->attributes)
        if (a.name == feature) return c->name;
      for (const auto& r : c->roles)
        if (r.name == feature) return c->name;
    }
    throw Error("class " + cls + " has no feature " + feature);
  }

  /// The key attribute visible on `cls`, if any.
  const AttributeDef* key_attribute(const std::string& cls) const {
    for (const ClassDef* c : ancestors(cls))
      for (const auto& a : c->attributes)
        if (a.is_key) return &a;
    return nullptr;
  }

  std::vector<std::string> subclasses_of(const std::string& name) const {
    std::vector<std::string> out;
    for (const auto& c : classes_)
      for (const auto& sup : c.superclasses)
        if (sup == name) out.push_back(c.name);
    return out;
  }

  /// `name` and all transitive subclasses, declaration order.
  std::vector<std::string> family(const std::string& name) const {
    std::vector<std::string> out;
    for (const auto& c : classes_) {
      if (subtype(c.name, name)) out.push_back(c.name);
    }
    return out;
  }

  bool subtype(const std::string& sub, const std::string& sup) const {
    std::set<std::string> seen;
    const ClassDef* c = &at(sub);
    at(sup);  // unknown names are an error, not "false"
    while (c) {
      if (c->name == sup) return true;
      if (!seen.insert(c->name).second) return false;  // cycle guard
      auto s = c->superclass();
      c = s ? find(*s) : nullptr;
    }
    return false;
  }

 private:
  std::vector<ClassDef> classes_;
  std::map<std::string, size_t> index_;
};

/// True iff sub = sup or sub transitively extends sup. Unknown names throw.
inline bool is_subtype(const Metamodel& mm, const std::string& sub, const std::string& sup) {
  return mm.subtype(sub, sup);
}

/// Owned or inherited feature lookup; throws naming class and feature.
inline Feature feature_of(const Metamodel& mm, const std::string& cls,
                          const std::string& feature) {
  if (const AttributeDef* a = mm.find_attribute(cls, feature)) return a;
  if (const RoleDef* r = mm.find_role(cls, feature)) return r;
  throw Error("class " + cls + " has no feature " + feature);
}

/// Parses the metamodel text format:
///
///   metamodel  ::= classdef*
///   classdef   ::= ["abstract"] "class" IDENT ["extends" IDENT] "{" member* "}"
///   member     ::= "attr" IDENT ":" ("string"|"integer"|"real"|"boolean") ["key"] ";"
///                | "ref"  IDENT ":" IDENT ("[*]" | "[1]") ";"
///
/// Classes may be referenced before their declaration; cross-references are
/// resolved after the whole text is read.
inline Metamodel parse_metamodel(std::string_view text) {
  Lexer lx(text);
  Metamodel mm;
  while (!lx.at_end()) {
    ClassDef cd;
    if (lx.accept_ident("abstract")) cd.is_abstract = true;
    if (!lx.accept_ident("class")) lx.fail("expected 'class'");
    cd.name = lx.expect_ident().text;
    if (lx.accept_ident("extends")) {
      cd.superclasses.push_back(lx.expect_ident().text);
      while (lx.accept_sym(","))  // lenient; validate() flags multiple inheritance
        cd.superclasses.push_back(lx.expect_ident().text);
    }
    lx.expect_sym("{");
    while (!lx.accept_sym("}")) {
      if (lx.accept_ident("attr")) {
        AttributeDef a;
        a.name = lx.expect_ident().text;
        lx.expect_sym(":");
        Token k = lx.expect_ident();
        if (k.text == "string") a.kind = AttrKind::String;
        else if (k.text == "integer") a.kind = AttrKind::Integer;
        else if (k.text == "real") a.kind = AttrKind::Real;
        else if (k.text == "boolean") a.kind = AttrKind::Boolean;
        else throw ParseError("unknown attribute type " + k.text, k.line, k.col);
        if (lx.accept_ident("key")) a.is_key = true;
        lx.expect_sym(";");
        cd.attributes.push_back(std::move(a));
      } else if (lx.accept_ident("ref")) {
        RoleDef r;
        r.name = lx.expect_ident().text;
        lx.expect_sym(":");
        r.target_class = lx.expect_ident().text;
        lx.expect_sym("[");
        if (lx.accept_sym("*")) {
          r.upper = Upper::Many;
        } else {
          Token t = lx.next();
          if (t.kind != Token::Int || t.int_val != 1)
            throw ParseError("multiplicity must be [*] or [1]", t.line, t.col);
          r.upper = Upper::One;
        }
        lx.expect_sym("]");
        lx.expect_sym(";");
        cd.roles.push_back(std::move(r));
      } else {
        lx.fail("expected 'attr', 'ref', or '}'");
      }
    }
    mm.add_class(std::move(cd));
  }
  // Resolve cross-references.
  for (const auto& c : mm.classes()) {
    for (const auto& sup : c.superclasses)
      if (!mm.has(sup)) throw Error("unknown superclass " + sup);
    for (const auto& r : c.roles)
      if (!mm.has(r.target_class))
        throw Error("unknown class " + r.target_class + " referenced by role " + c.name +
                    "." + r.name);
  }
  return mm;
}

/// Inverse of parse_metamodel; parse(print(parse(t))) == parse(t).
inline std::string print_metamodel(const Metamodel& mm) {
  std::string out;
  for (const auto& c : mm.classes()) {
    if (c.is_abstract) out += "abstract ";
    out += "class " + c.name;
    for (size_t i = 0; i < c.superclasses.size(); ++i)
      out += (i ? ", " : " extends ") + c.superclasses[i];
    out += " {";
    if (c.attributes.empty() && c.roles.empty()) {
      out += " }\n";
      continue;
    }
    out += "\n";
    for (const auto& a : c.attributes) {
      out += "  attr " + a.name + " : " + attr_kind_name(a.kind);
      if (a.is_key) out += " key";
      out += ";\n";
    }
    for (const auto& r : c.roles) {
      out += "  ref " + r.name + " : " + r.target_class;
      out += r.upper == Upper::Many ? " [*]" : " [1]";
      out += ";\n";
    }
    out += "}\n";
  }
  return out;
}

/// Well-formedness rules. Empty result means the metamodel is valid:
/// single inheritance, non-leaf classes abstract, keys of string/integer
/// kind, at most one key per class, unique flattened feature names, and
/// no inheritance cycles.
inline std::vector<std::string> validate(const Metamodel& mm) {
  std::vector<std::string> out;
  std::set<std::string> cyclic;
  for (const auto& c : mm.classes()) {
    if (c.superclasses.size() > 1)
      out.push_back("class " + c.name + " has multiple superclasses");
    // cycle detection along the (first-superclass) chain
    std::set<std::string> seen{c.name};
    const ClassDef* p = &c;
    while (auto sup = p->superclass()) {
      p = mm.find(*sup);
      if (!p) break;
      if (!seen.insert(p->name).second) {
        if (cyclic.insert(c.name).second)
          out.push_back("inheritance cycle involving class " + c.name);
        break;
      }
    }
    if (cyclic.count(c.name)) continue;
    if (!c.is_abstract && !mm.subclasses_of(c.name).empty())
      out.push_back("non-leaf class " + c.name + " must be abstract");
    int keys = 0;
    std::set<std::string> names;
    for (const Feature& f : mm.flattened_features(c.name)) {
      const std::string& n = std::holds_alternative<const AttributeDef*>(f)
                                 ? std::get<const AttributeDef*>(f)->name
                                 : std::get<const RoleDef*>(f)->name;
      if (!names.insert(n).second)
        out.push_back("duplicate feature " + n + " in class " + c.name);
      if (const auto* a = std::get_if<const AttributeDef*>(&f)) {
        if ((*a)->is_key) {
          ++keys;
          if ((*a)->kind != AttrKind::String && (*a)->kind != AttrKind::Integer)
            out.push_back("key attribute " + c.name + "." + (*a)->name +
                          " must be string or integer");
        }
      }
    }
    if (keys > 1) out.push_back("class " + c.name + " has multiple key attributes");
  }
  return out;
}

/// Lowercase initials of a class name: RealFigure -> "rf", Canvas -> "c".
/// Used for generated object labels and scope variable names.
inline std::string class_initials(const std::string& cls) {
  std::string out;
  for (char c : cls)
    if (std::isupper(static_cast<unsigned char>(c)))
      out += static_cast<char>(std::tolower(c));
  if (out.empty() && !cls.empty())
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(cls[0])));
  return out;
}

}  // namespace uct
