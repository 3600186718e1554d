#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "uct/metamodel.hpp"
#include "uct/value.hpp"

namespace uct {

/// Records what a sequence of model mutations touched. The engine attaches
/// one of these per phase to build run reports and to check write frames.
struct MutationLog {
  std::map<std::string, int> created;  // concrete class -> count
  std::map<std::string, int> deleted;
  int link_changes = 0;                // element-level link/ref changes
  std::set<std::string> touched;       // "DeclaringClass.feature" or "Class" (extent)
};

/// In-memory object graph conforming to a metamodel.
///
/// Single-writer: no concurrent mutation. A frozen model or snapshot may be
/// shared read-only across threads.
class Model {
 public:
  explicit Model(std::shared_ptr<const Metamodel> mm) : mm_(std::move(mm)) {
    if (!mm_) throw Error("model requires a metamodel");
  }

  Model(const Model& other)
      : mm_(other.mm_),
        order_(other.order_),
        objects_(other.objects_),
        key_index_(other.key_index_),
        counters_(other.counters_),
        log_(nullptr) {}

  Model& operator=(const Model& other) {
    if (this != &other) {
      mm_ = other.mm_;
      order_ = other.order_;
      objects_ = other.objects_;
      key_index_ = other.key_index_;
      counters_ = other.counters_;
      log_ = nullptr;
    }
    return *this;
  }

  Model(Model&&) = default;
  Model& operator=(Model&&) = default;

  const Metamodel& metamodel() const { return *mm_; }
  std::shared_ptr<const Metamodel> metamodel_ptr() const { return mm_; }

  void set_mutation_log(MutationLog* log) { log_ = log; }

  bool exists(const ObjectId& o) const { return objects_.count(o.label) != 0; }

  const std::string& class_of(const ObjectId& o) const { return rec(o).cls; }

  size_t object_count() const { return order_.size(); }

  /// All objects, creation order.
  std::vector<ObjectId> objects() const {
    std::vector<ObjectId> out;
    out.reserve(order_.size());
    for (const auto& l : order_) out.push_back(ObjectId{l});
    return out;
  }

  /// Instances of `cls` or a subtype, creation order. Unknown class throws.
  std::vector<ObjectId> extent(const std::string& cls) const {
    mm_->at(cls);
    std::vector<ObjectId> out;
    for (const auto& l : order_)
      if (mm_->subtype(objects_.at(l).cls, cls)) out.push_back(ObjectId{l});
    return out;
  }

  /// Declares an object with an explicit label (model file path).
  ObjectId add_object(const std::string& label, const std::string& cls) {
    const ClassDef& c = mm_->at(cls);
    if (c.is_abstract) throw Error("class " + cls + " is abstract");
    if (objects_.count(label)) throw Error("duplicate object label " + label);
    objects_[label] = ObjectRec{cls, {}, {}, {}};
    order_.push_back(label);
    if (log_) {
      ++log_->created[cls];
      log_->touched.insert(cls);
    }
    return ObjectId{label};
  }

  /// Creates an instance with a fresh label: lowercase class initials plus a
  /// 1-based per-class counter (rf1, rf2, ...), skipping taken labels.
  ObjectId create_object(const std::string& cls) {
    const ClassDef& c = mm_->at(cls);
    if (c.is_abstract) throw Error("cannot instantiate abstract class " + cls);
    std::string prefix = class_initials(cls);
    int& n = counters_[cls];
    std::string label;
    do {
      ++n;
      label = prefix + std::to_string(n);
    } while (objects_.count(label));
    return add_object(label, cls);
  }

  /// Removes the object, every link from it, and every link to it.
  void delete_object(const ObjectId& o) {
    ObjectRec& r = rec(o);
    // key index
    if (const AttributeDef* key = mm_->key_attribute(r.cls)) {
      auto it = r.attrs.find(key->name);
      if (it != r.attrs.end()) unindex_key(o, r.cls, it->second);
    }
    if (log_) {
      ++log_->deleted[r.cls];
      log_->touched.insert(r.cls);
      for (const auto& [f, _] : r.attrs)
        log_->touched.insert(mm_->declaring_class(r.cls, f) + "." + f);
      for (const auto& [f, _] : r.refs)
        log_->touched.insert(mm_->declaring_class(r.cls, f) + "." + f);
      for (const auto& [f, v] : r.many)
        if (!v.empty()) log_->touched.insert(mm_->declaring_class(r.cls, f) + "." + f);
    }
    // incoming links anywhere
    for (const auto& label : order_) {
      if (label == o.label) continue;
      ObjectRec& s = objects_.at(label);
      for (auto it = s.refs.begin(); it != s.refs.end();) {
        if (it->second == o) {
          if (log_) {
            ++log_->link_changes;
            log_->touched.insert(mm_->declaring_class(s.cls, it->first) + "." + it->first);
          }
          it = s.refs.erase(it);
        } else {
          ++it;
        }
      }
      for (auto& [role, targets] : s.many) {
        size_t before = targets.size();
        targets.erase(std::remove(targets.begin(), targets.end(), o), targets.end());
        if (log_ && targets.size() != before) {
          log_->link_changes += static_cast<int>(before - targets.size());
          log_->touched.insert(mm_->declaring_class(s.cls, role) + "." + role);
        }
      }
    }
    objects_.erase(o.label);
    order_.erase(std::remove(order_.begin(), order_.end(), o.label), order_.end());
  }

  void set_attr(const ObjectId& o, const std::string& attr, Value v) {
    ObjectRec& r = rec(o);
    const AttributeDef* a = mm_->find_attribute(r.cls, attr);
    if (!a) throw Error("class " + r.cls + " has no attribute " + attr);
    v = coerce_attr(*a, std::move(v), r.cls);
    if (a->is_key) {
      auto it = r.attrs.find(attr);
      if (it != r.attrs.end()) unindex_key(o, r.cls, it->second);
      index_key(o, r.cls, v);
    }
    r.attrs[attr] = std::move(v);
    if (log_) log_->touched.insert(mm_->declaring_class(r.cls, attr) + "." + attr);
  }

  std::optional<Value> attr(const ObjectId& o, const std::string& name) const {
    const ObjectRec& r = rec(o);
    if (!mm_->find_attribute(r.cls, name))
      throw Error("class " + r.cls + " has no attribute " + name);
    auto it = r.attrs.find(name);
    if (it == r.attrs.end()) return std::nullopt;
    return it->second;
  }

  void set_ref(const ObjectId& o, const std::string& role, const ObjectId& target) {
    ObjectRec& r = rec(o);
    const RoleDef* rd = role_def(r.cls, role, Upper::One);
    check_target(*rd, target);
    auto it = r.refs.find(role);
    if (it == r.refs.end() || it->second != target) {
      if (log_) ++log_->link_changes;
      r.refs[role] = target;
    }
    if (log_) log_->touched.insert(mm_->declaring_class(r.cls, role) + "." + role);
  }

  std::optional<ObjectId> ref(const ObjectId& o, const std::string& role) const {
    const ObjectRec& r = rec(o);
    role_def(r.cls, role, Upper::One);
    auto it = r.refs.find(role);
    if (it == r.refs.end()) return std::nullopt;
    return it->second;
  }

  /// Set-semantics insertion: re-inserting an existing target is a no-op.
  void insert_link(const ObjectId& o, const std::string& role, const ObjectId& target) {
    ObjectRec& r = rec(o);
    const RoleDef* rd = role_def(r.cls, role, Upper::Many);
    check_target(*rd, target);
    auto& v = r.many[role];
    if (std::find(v.begin(), v.end(), target) == v.end()) {
      v.push_back(target);
      if (log_) ++log_->link_changes;
    }
    if (log_) log_->touched.insert(mm_->declaring_class(r.cls, role) + "." + role);
  }

  void remove_link(const ObjectId& o, const std::string& role, const ObjectId& target) {
    ObjectRec& r = rec(o);
    role_def(r.cls, role, Upper::Many);
    auto& v = r.many[role];
    auto it = std::find(v.begin(), v.end(), target);
    if (it != v.end()) {
      v.erase(it);
      if (log_) ++log_->link_changes;
    }
    if (log_) log_->touched.insert(mm_->declaring_class(r.cls, role) + "." + role);
  }

  void clear_links(const ObjectId& o, const std::string& role) {
    ObjectRec& r = rec(o);
    role_def(r.cls, role, Upper::Many);
    auto& v = r.many[role];
    if (log_) {
      log_->link_changes += static_cast<int>(v.size());
      log_->touched.insert(mm_->declaring_class(r.cls, role) + "." + role);
    }
    v.clear();
  }

  const std::vector<ObjectId>& links(const ObjectId& o, const std::string& role) const {
    const ObjectRec& r = rec(o);
    role_def(r.cls, role, Upper::Many);
    auto it = r.many.find(role);
    if (it == r.many.end()) return empty_links();
    return it->second;
  }

  /// Uniform feature read used by the evaluator: attribute value, one-end
  /// target, or many-end as a set. An unset one-end reads as the empty set;
  /// an unset attribute is an error.
  Value feature_value(const ObjectId& o, const std::string& feature) const {
    const ObjectRec& r = rec(o);
    if (const AttributeDef* a = mm_->find_attribute(r.cls, feature)) {
      auto it = r.attrs.find(feature);
      if (it == r.attrs.end())
        throw Error("attribute " + feature + " of " + o.label + " is not set");
      (void)a;
      return it->second;
    }
    if (const RoleDef* rd = mm_->find_role(r.cls, feature)) {
      if (rd->upper == Upper::One) {
        auto it = r.refs.find(feature);
        if (it == r.refs.end()) return SetVal{};
        return it->second;
      }
      SetVal s;
      auto it = r.many.find(feature);
      if (it != r.many.end())
        for (const auto& t : it->second) s.elems.push_back(t);
      return s;
    }
    throw Error("class " + r.cls + " has no feature " + feature);
  }

  /// `E[x]` for a single key value. Exactly one instance must match.
  ObjectId key_lookup(const std::string& cls, const Value& key) const {
    const AttributeDef* a = mm_->key_attribute(cls);
    if (!a) throw Error("class " + cls + " has no key attribute");
    auto matches = key_matches(cls, key);
    if (matches.empty())
      throw Error("no " + cls + " with key " + key.to_string());
    if (matches.size() > 1)
      throw Error("ambiguous key " + key.to_string() + " for class " + cls);
    return matches.front();
  }

  /// All instances of cls (or subtypes) whose key equals `key`,
  /// creation order.
  std::vector<ObjectId> key_matches(const std::string& cls, const Value& key) const {
    if (!mm_->key_attribute(cls)) throw Error("class " + cls + " has no key attribute");
    std::vector<ObjectId> out;
    auto ci = key_index_.find(cls);
    if (ci == key_index_.end()) return out;
    auto ki = ci->second.find(key_string(key));
    if (ki == ci->second.end()) return out;
    // keep creation order
    for (const auto& l : order_)
      if (std::find(ki->second.begin(), ki->second.end(), l) != ki->second.end())
        out.push_back(ObjectId{l});
    return out;
  }

  /// Deep, independent copy. Later mutation of either side leaves the
  /// other unchanged. The mutation log is not carried over.
  Model snapshot() const { return *this; }

  /// Structural conformance of the instance data to the metamodel:
  /// attribute kinds and link target classes.
  std::vector<std::string> conformance_violations() const {
    std::vector<std::string> out;
    for (const auto& label : order_) {
      const ObjectRec& r = objects_.at(label);
      for (const auto& [name, v] : r.attrs) {
        const AttributeDef* a = mm_->find_attribute(r.cls, name);
        if (!a) {
          out.push_back(label + ": unknown attribute " + name);
          continue;
        }
        if (!attr_matches(*a, v))
          out.push_back(label + "." + name + ": value " + v.to_string() + " is not " +
                        attr_kind_name(a->kind));
      }
      auto check_role = [&](const std::string& name, const ObjectId& t) {
        const RoleDef* rd = mm_->find_role(r.cls, name);
        if (!rd) {
          out.push_back(label + ": unknown role " + name);
          return;
        }
        if (!exists(t)) {
          out.push_back(label + "." + name + ": dangling target " + t.label);
          return;
        }
        if (!mm_->subtype(class_of(t), rd->target_class))
          out.push_back(label + "." + name + ": target " + t.label + " is not a " +
                        rd->target_class);
      };
      for (const auto& [name, t] : r.refs) check_role(name, t);
      for (const auto& [name, ts] : r.many)
        for (const auto& t : ts) check_role(name, t);
    }
    return out;
  }

  /// Rebuilds the key index from attribute slots (test support: the
  /// maintained index must always equal the rebuilt one).
  std::map<std::string, std::map<std::string, std::vector<std::string>>>
  rebuild_key_index() const {
    std::map<std::string, std::map<std::string, std::vector<std::string>>> out;
    for (const auto& label : order_) {
      const ObjectRec& r = objects_.at(label);
      for (const ClassDef* anc : mm_->ancestors(r.cls)) {
        if (const AttributeDef* key = mm_->key_attribute(anc->name)) {
          auto it = r.attrs.find(key->name);
          if (it != r.attrs.end()) out[anc->name][key_string(it->second)].push_back(label);
        }
      }
    }
    return out;
  }

  const std::map<std::string, std::map<std::string, std::vector<std::string>>>&
  key_index() const {
    return key_index_;
  }

 private:
  struct ObjectRec {
    std::string cls;
    std::map<std::string, Value> attrs;
    std::map<std::string, ObjectId> refs;
    std::map<std::string, std::vector<ObjectId>> many;
  };

  static const std::vector<ObjectId>& empty_links() {
    static const std::vector<ObjectId> e;
    return e;
  }

  const ObjectRec& rec(const ObjectId& o) const {
    auto it = objects_.find(o.label);
    if (it == objects_.end()) throw Error("unknown object " + o.label);
    return it->second;
  }
  ObjectRec& rec(const ObjectId& o) {
    auto it = objects_.find(o.label);
    if (it == objects_.end()) throw Error("unknown object " + o.label);
    return it->second;
  }

  const RoleDef* role_def(const std::string& cls, const std::string& role,
                          Upper expected) const {
    const RoleDef* rd = mm_->find_role(cls, role);
    if (!rd) throw Error("class " + cls + " has no role " + role);
    if (rd->upper != expected)
      throw Error("role " + cls + "." + role +
                  (expected == Upper::One ? " is many-valued" : " is single-valued"));
    return rd;
  }

  void check_target(const RoleDef& rd, const ObjectId& target) const {
    const ObjectRec& t = rec(target);
    if (!mm_->subtype(t.cls, rd.target_class))
      throw Error("cannot link " + target.label + " (" + t.cls + ") into role " + rd.name +
                  " of target class " + rd.target_class);
  }

  static bool attr_matches(const AttributeDef& a, const Value& v) {
    switch (a.kind) {
      case AttrKind::String: return v.is_string();
      case AttrKind::Integer: return v.is_int();
      case AttrKind::Real: return v.is_real();
      case AttrKind::Boolean: return v.is_bool();
    }
    return false;
  }

  static Value coerce_attr(const AttributeDef& a, Value v, const std::string& cls) {
    if (a.kind == AttrKind::Real && v.is_int()) return Value(static_cast<double>(v.as_int()));
    if (!attr_matches(a, v))
      throw Error("type mismatch: " + v.to_string() + " is not " + attr_kind_name(a.kind) +
                  " (attribute " + cls + "." + a.name + ")");
    return v;
  }

  static std::string key_string(const Value& v) {
    if (v.is_string()) return "s:" + v.as_string();
    if (v.is_int()) return "i:" + std::to_string(v.as_int());
    throw Error("key value must be string or integer, got " + v.to_string());
  }

  // Index o under every ancestor class that sees a key attribute.
  void index_key(const ObjectId& o, const std::string& cls, const Value& key) {
    for (const ClassDef* anc : mm_->ancestors(cls))
      if (mm_->key_attribute(anc->name))
        key_index_[anc->name][key_string(key)].push_back(o.label);
  }

  void unindex_key(const ObjectId& o, const std::string& cls, const Value& key) {
    for (const ClassDef* anc : mm_->ancestors(cls)) {
      if (!mm_->key_attribute(anc->name)) continue;
      auto ci = key_index_.find(anc->name);
      if (ci == key_index_.end()) continue;
      auto ki = ci->second.find(key_string(key));
      if (ki == ci->second.end()) continue;
      auto& v = ki->second;
      v.erase(std::remove(v.begin(), v.end(), o.label), v.end());
      if (v.empty()) ci->second.erase(ki);
      if (ci->second.empty()) key_index_.erase(ci);
    }
  }

  std::shared_ptr<const Metamodel> mm_;
  std::vector<std::string> order_;
  std::map<std::string, ObjectRec> objects_;
  // class -> key string -> labels (normally a single label per key)
  std::map<std::string, std::map<std::string, std::vector<std::string>>> key_index_;
  std::map<std::string, int> counters_;
  MutationLog* log_ = nullptr;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

/// Reads the line-oriented model format:
///
///   label : ClassName            object creation
///   label : owner.role           insert label into owner's many-end
///   owner.feature = literal      attribute value, or one-end target when
///                                the literal is a bare object label
///
/// Objects may be referenced before their creation line (two-pass load);
/// link lines keep their textual order in many-end sequences.
inline Model parse_model(std::shared_ptr<const Metamodel> mm, std::string_view text) {
  Model m(std::move(mm));
  const Metamodel& meta = m.metamodel();

  std::vector<std::pair<int, std::string>> lines;
  {
    size_t start = 0;
    int n = 1;
    while (start <= text.size()) {
      size_t nl = text.find('\n', start);
      std::string_view raw = nl == std::string_view::npos ? text.substr(start)
                                                          : text.substr(start, nl - start);
      std::string_view line = detail::trim(raw);
      if (!line.empty()) lines.emplace_back(n, std::string(line));
      if (nl == std::string_view::npos) break;
      start = nl + 1;
      ++n;
    }
  }

  auto err = [](int line, const std::string& msg) -> Error {
    return Error("line " + std::to_string(line) + ": " + msg);
  };

  // Classify once; declare objects in textual order first.
  struct Fact {
    int line;
    int kind;  // 0 = creation, 1 = insertion, 2 = assignment
    std::string a, b, c;  // creation: label,class; insertion: member,owner,role;
                          // assignment: owner,feature,literal
  };
  std::vector<Fact> facts;
  for (const auto& [n, line] : lines) {
    // find '=' outside quotes
    size_t eq = std::string::npos;
    bool in_str = false;
    for (size_t i = 0; i < line.size(); ++i) {
      char c = line[i];
      if (c == '"' && (i == 0 || line[i - 1] != '\\')) in_str = !in_str;
      else if (c == '=' && !in_str) {
        eq = i;
        break;
      }
    }
    if (eq != std::string::npos) {
      std::string lhs(detail::trim(line.substr(0, eq)));
      std::string rhs(detail::trim(line.substr(eq + 1)));
      size_t dot = lhs.find('.');
      if (dot == std::string::npos)
        throw err(n, "assignment left side must be object.feature: " + line);
      facts.push_back({n, 2, lhs.substr(0, dot), lhs.substr(dot + 1), rhs});
      continue;
    }
    size_t colon = line.find(':');
    if (colon == std::string::npos) throw err(n, "unrecognized line: " + line);
    std::string lhs(detail::trim(line.substr(0, colon)));
    std::string rhs(detail::trim(line.substr(colon + 1)));
    if (lhs.empty() || rhs.empty()) throw err(n, "unrecognized line: " + line);
    size_t dot = rhs.find('.');
    if (dot == std::string::npos) {
      facts.push_back({n, 0, lhs, rhs, ""});
    } else {
      facts.push_back({n, 1, lhs, rhs.substr(0, dot), rhs.substr(dot + 1)});
    }
  }

  for (const auto& f : facts) {
    if (f.kind != 0) continue;
    if (!meta.has(f.b)) throw err(f.line, "unknown class " + f.b);
    try {
      m.add_object(f.a, f.b);
    } catch (const Error& e) {
      throw err(f.line, e.what());
    }
  }

  auto resolve = [&](int line, const std::string& label) -> ObjectId {
    ObjectId o{label};
    if (!m.exists(o)) throw err(line, "undeclared object " + label);
    return o;
  };

  for (const auto& f : facts) {
    try {
      if (f.kind == 1) {
        ObjectId member = resolve(f.line, f.a);
        ObjectId owner = resolve(f.line, f.b);
        const RoleDef* rd = meta.find_role(m.class_of(owner), f.c);
        if (!rd) throw err(f.line, "class " + m.class_of(owner) + " has no role " + f.c);
        if (rd->upper == Upper::One)
          throw err(f.line, "role " + f.c + " is single-valued; use owner.feature = target");
        m.insert_link(owner, f.c, member);
      } else if (f.kind == 2) {
        ObjectId owner = resolve(f.line, f.a);
        const std::string& cls = m.class_of(owner);
        const std::string& lit = f.c;
        if (meta.find_attribute(cls, f.b)) {
          Value v;
          if (lit.size() >= 2 && lit.front() == '"' && lit.back() == '"') {
            std::string s;
            for (size_t i = 1; i + 1 < lit.size(); ++i) {
              if (lit[i] == '\\' && i + 2 < lit.size()) {
                ++i;
                s += lit[i] == 'n' ? '\n' : lit[i];
              } else {
                s += lit[i];
              }
            }
            v = Value(s);
          } else if (lit == "true" || lit == "false") {
            v = Value(lit == "true");
          } else if (!lit.empty() && (std::isdigit(static_cast<unsigned char>(lit[0])))) {
            if (lit.find('.') != std::string::npos) v = Value(std::stod(lit));
            else v = Value(static_cast<long long>(std::stoll(lit)));
          } else {
            throw err(f.line, "type mismatch: bare identifier " + lit +
                                  " assigned to attribute " + f.b);
          }
          m.set_attr(owner, f.b, std::move(v));
        } else if (const RoleDef* rd = meta.find_role(cls, f.b)) {
          if (rd->upper == Upper::Many)
            throw err(f.line, "role " + f.b + " is many-valued; use member : owner.role");
          if (lit.size() >= 2 && lit.front() == '"')
            throw err(f.line, "type mismatch: string assigned to reference " + f.b);
          m.set_ref(owner, f.b, resolve(f.line, lit));
        } else {
          throw err(f.line, "class " + cls + " has no feature " + f.b);
        }
      }
    } catch (const Error& e) {
      std::string w = e.what();
      if (w.rfind("line ", 0) == 0) throw;
      throw err(f.line, w);
    }
  }
  return m;
}

/// Serializes a model in the same line format, deterministically: objects in
/// creation order; per object its attribute lines, one-end lines, then
/// many-end lines in sequence order (features in declaration order).
inline std::string write_model(const Model& m) {
  std::string out;
  const Metamodel& mm = m.metamodel();
  for (const ObjectId& o : m.objects()) {
    const std::string& cls = m.class_of(o);
    out += o.label + " : " + cls + "\n";
    for (const Feature& f : mm.flattened_features(cls)) {
      if (const auto* a = std::get_if<const AttributeDef*>(&f)) {
        auto v = m.attr(o, (*a)->name);
        if (v) out += o.label + "." + (*a)->name + " = " + v->to_string() + "\n";
      }
    }
    for (const Feature& f : mm.flattened_features(cls)) {
      if (const auto* r = std::get_if<const RoleDef*>(&f)) {
        if ((*r)->upper != Upper::One) continue;
        auto t = m.ref(o, (*r)->name);
        if (t) out += o.label + "." + (*r)->name + " = " + t->label + "\n";
      }
    }
    for (const Feature& f : mm.flattened_features(cls)) {
      if (const auto* r = std::get_if<const RoleDef*>(&f)) {
        if ((*r)->upper != Upper::Many) continue;
        for (const ObjectId& t : m.links(o, (*r)->name))
          out += t.label + " : " + o.label + "." + (*r)->name + "\n";
      }
    }
  }
  return out;
}

struct IsoResult {
  bool ok = false;
  std::map<std::string, std::string> witness;  // a-label -> b-label
  std::string mismatch;                        // first structural difference

  explicit operator bool() const { return ok; }
};

/// Class-, attribute-, and link-preserving bijection search between two
/// models over the same metamodel. Objects of keyed classes are matched by
/// (class, key value) first; the remainder is resolved by backtracking.
/// Many-ends compare as sets.
inline IsoResult isomorphic(const Model& a, const Model& b) {
  IsoResult res;
  if (print_metamodel(a.metamodel()) != print_metamodel(b.metamodel()))
    throw Error("isomorphic: models have different metamodels");
  const Metamodel& mm = a.metamodel();

  auto by_class = [&mm](const Model& m) {
    std::map<std::string, std::vector<ObjectId>> out;
    for (const ObjectId& o : m.objects()) out[m.class_of(o)].push_back(o);
    (void)mm;
    return out;
  };
  auto ca = by_class(a), cb = by_class(b);
  if (ca.size() != cb.size() || a.object_count() != b.object_count()) {
    res.mismatch = "object counts differ";
    return res;
  }
  for (const auto& [cls, objs] : ca) {
    auto it = cb.find(cls);
    if (it == cb.end() || it->second.size() != objs.size()) {
      res.mismatch = "extent size of " + cls + " differs: " +
                     std::to_string(objs.size()) + " vs " +
                     std::to_string(it == cb.end() ? 0 : it->second.size());
      return res;
    }
  }

  std::map<std::string, std::string> fwd;  // a -> b
  std::map<std::string, std::string> rev;  // b -> a

  auto attrs_equal = [&](const ObjectId& x, const ObjectId& y) {
    const std::string& cls = a.class_of(x);
    for (const Feature& f : mm.flattened_features(cls)) {
      if (const auto* ad = std::get_if<const AttributeDef*>(&f)) {
        auto va = a.attr(x, (*ad)->name);
        auto vb = b.attr(y, (*ad)->name);
        if (va.has_value() != vb.has_value()) return false;
        if (va && !(*va == *vb)) return false;
      }
    }
    return true;
  };
  auto degrees_equal = [&](const ObjectId& x, const ObjectId& y) {
    const std::string& cls = a.class_of(x);
    for (const Feature& f : mm.flattened_features(cls)) {
      if (const auto* rd = std::get_if<const RoleDef*>(&f)) {
        if ((*rd)->upper == Upper::One) {
          if (a.ref(x, (*rd)->name).has_value() != b.ref(y, (*rd)->name).has_value())
            return false;
        } else {
          if (a.links(x, (*rd)->name).size() != b.links(y, (*rd)->name).size()) return false;
        }
      }
    }
    return true;
  };

  // Seed matches by (class, key value) where unambiguous on both sides.
  for (const auto& [cls, objs] : ca) {
    const AttributeDef* key = mm.key_attribute(cls);
    if (!key) continue;
    for (const ObjectId& x : objs) {
      auto kv = a.attr(x, key->name);
      if (!kv) continue;
      auto ma = a.key_matches(cls, *kv);
      auto mb = b.key_matches(cls, *kv);
      // restrict to exact class (key_matches is subtype-inclusive)
      auto exact = [&](std::vector<ObjectId> v, const Model& m) {
        std::vector<ObjectId> out;
        for (auto& o : v)
          if (m.class_of(o) == cls) out.push_back(o);
        return out;
      };
      ma = exact(ma, a);
      mb = exact(mb, b);
      if (ma.size() == 1 && mb.empty()) {
        res.mismatch = "no " + cls + " with key " + kv->to_string() + " in second model";
        return res;
      }
      if (ma.size() != 1 || mb.size() != 1) continue;  // ambiguous: backtrack below
      if (!attrs_equal(x, mb.front()) || !degrees_equal(x, mb.front())) {
        res.mismatch = cls + " " + x.label + " and " + mb.front().label +
                       " (matched by key " + kv->to_string() + ") differ";
        return res;
      }
      fwd[x.label] = mb.front().label;
      rev[mb.front().label] = x.label;
    }
  }

  // Remaining a-objects in creation order.
  std::vector<ObjectId> pending;
  for (const ObjectId& o : a.objects())
    if (!fwd.count(o.label)) pending.push_back(o);

  // Partial consistency: links between already-mapped objects must agree.
  auto consistent = [&](const ObjectId& x, const ObjectId& y) {
    if (!attrs_equal(x, y) || !degrees_equal(x, y)) return false;
    const std::string& cls = a.class_of(x);
    for (const Feature& f : mm.flattened_features(cls)) {
      const auto* rd = std::get_if<const RoleDef*>(&f);
      if (!rd) continue;
      if ((*rd)->upper == Upper::One) {
        auto ta = a.ref(x, (*rd)->name);
        auto tb = b.ref(y, (*rd)->name);
        if (ta && fwd.count(ta->label)) {
          if (!tb || fwd[ta->label] != tb->label) return false;
        }
        if (tb && rev.count(tb->label)) {
          if (!ta || rev[tb->label] != ta->label) return false;
        }
      } else {
        const auto& la = a.links(x, (*rd)->name);
        const auto& lb = b.links(y, (*rd)->name);
        for (const ObjectId& t : la) {
          if (!fwd.count(t.label)) continue;
          ObjectId img{fwd[t.label]};
          if (std::find(lb.begin(), lb.end(), img) == lb.end()) return false;
        }
        for (const ObjectId& t : lb) {
          if (!rev.count(t.label)) continue;
          ObjectId pre{rev[t.label]};
          if (std::find(la.begin(), la.end(), pre) == la.end()) return false;
        }
      }
    }
    // incoming links from mapped sources
    for (const ObjectId& s : a.objects()) {
      if (!fwd.count(s.label)) continue;
      ObjectId simg{fwd[s.label]};
      const std::string& scls = a.class_of(s);
      for (const Feature& f : mm.flattened_features(scls)) {
        const auto* rd = std::get_if<const RoleDef*>(&f);
        if (!rd) continue;
        if ((*rd)->upper == Upper::One) {
          auto ta = a.ref(s, (*rd)->name);
          auto tb = b.ref(simg, (*rd)->name);
          bool hits_x = ta && *ta == x;
          bool hits_y = tb && *tb == y;
          if (hits_x != hits_y) return false;
        } else {
          const auto& la = a.links(s, (*rd)->name);
          const auto& lb = b.links(simg, (*rd)->name);
          bool hits_x = std::find(la.begin(), la.end(), x) != la.end();
          bool hits_y = std::find(lb.begin(), lb.end(), y) != lb.end();
          if (hits_x != hits_y) return false;
        }
      }
    }
    return true;
  };

  std::function<bool(size_t)> search = [&](size_t i) -> bool {
    if (i == pending.size()) return true;
    const ObjectId& x = pending[i];
    const std::string& cls = a.class_of(x);
    for (const ObjectId& y : cb[cls]) {
      if (rev.count(y.label)) continue;
      if (!consistent(x, y)) continue;
      fwd[x.label] = y.label;
      rev[y.label] = x.label;
      if (search(i + 1)) return true;
      fwd.erase(x.label);
      rev.erase(y.label);
    }
    return false;
  };

  if (!search(0)) {
    res.mismatch = "no structure-preserving object mapping exists";
    res.witness = fwd;  // partial seed mapping, for diagnostics
    return res;
  }

  // Full verification of every link under the completed mapping.
  for (const ObjectId& x : a.objects()) {
    ObjectId y{fwd[x.label]};
    const std::string& cls = a.class_of(x);
    for (const Feature& f : mm.flattened_features(cls)) {
      const auto* rd = std::get_if<const RoleDef*>(&f);
      if (!rd) continue;
      if ((*rd)->upper == Upper::One) {
        auto ta = a.ref(x, (*rd)->name);
        auto tb = b.ref(y, (*rd)->name);
        if (ta.has_value() != tb.has_value() || (ta && fwd[ta->label] != tb->label)) {
          res.mismatch = "link " + x.label + "." + (*rd)->name + " differs";
          return res;
        }
      } else {
        const auto& la = a.links(x, (*rd)->name);
        const auto& lb = b.links(y, (*rd)->name);
        if (la.size() != lb.size()) {
          res.mismatch = "link set " + x.label + "." + (*rd)->name + " differs in size";
          return res;
        }
        for (const ObjectId& t : la) {
          ObjectId img{fwd[t.label]};
          if (std::find(lb.begin(), lb.end(), img) == lb.end()) {
            res.mismatch = "link " + x.label + "." + (*rd)->name + " -> " + t.label +
                           " has no counterpart";
            return res;
          }
        }
      }
    }
  }

  res.ok = true;
  res.witness = fwd;
  return res;
}

}  // namespace uct
