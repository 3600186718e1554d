#pragma once

#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace uct {

/// Base error for all library failures (parse, evaluation, model contract).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Syntax error carrying a source position.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, int line, int col)
      : Error("line " + std::to_string(line) + ":" + std::to_string(col) + ": " + msg),
        line(line),
        col(col) {}
  int line;
  int col;
};

/// Identity of an object inside a Model. Labels are unique per model.
struct ObjectId {
  std::string label;

  friend bool operator==(const ObjectId& a, const ObjectId& b) { return a.label == b.label; }
  friend bool operator!=(const ObjectId& a, const ObjectId& b) { return a.label != b.label; }
  friend bool operator<(const ObjectId& a, const ObjectId& b) { return a.label < b.label; }
};

class Value;

/// Duplicate-free collection with stable insertion order.
struct SetVal {
  std::vector<Value> elems;
};

/// Ordered collection, duplicates allowed.
struct SeqVal {
  std::vector<Value> elems;
};

/// Runtime value: primitive, object reference, set, or sequence.
class Value {
 public:
  using Variant =
      std::variant<std::string, long long, double, bool, ObjectId, SetVal, SeqVal>;

  Value() : v_(false) {}
  Value(std::string s) : v_(std::move(s)) {}
  Value(const char* s) : v_(std::string(s)) {}
  Value(long long i) : v_(i) {}
  Value(int i) : v_(static_cast<long long>(i)) {}
  Value(double d) : v_(d) {}
  Value(bool b) : v_(b) {}
  Value(ObjectId o) : v_(std::move(o)) {}
  Value(SetVal s) : v_(std::move(s)) {}
  Value(SeqVal s) : v_(std::move(s)) {}

  bool is_string() const { return std::holds_alternative<std::string>(v_); }
  bool is_int() const { return std::holds_alternative<long long>(v_); }
  bool is_real() const { return std::holds_alternative<double>(v_); }
  bool is_bool() const { return std::holds_alternative<bool>(v_); }
  bool is_object() const { return std::holds_alternative<ObjectId>(v_); }
  bool is_set() const { return std::holds_alternative<SetVal>(v_); }
  bool is_seq() const { return std::holds_alternative<SeqVal>(v_); }
  bool is_number() const { return is_int() || is_real(); }
  bool is_collection() const { return is_set() || is_seq(); }

  const std::string& as_string() const { return get<std::string>("string"); }
  long long as_int() const { return get<long long>("integer"); }
  double as_real() const { return get<double>("real"); }
  bool as_bool() const { return get<bool>("boolean"); }
  const ObjectId& as_object() const { return get<ObjectId>("object"); }
  const SetVal& as_set() const { return get<SetVal>("set"); }
  const SeqVal& as_seq() const { return get<SeqVal>("sequence"); }

  double as_number() const {
    if (is_int()) return static_cast<double>(as_int());
    return as_real();
  }

  /// Elements of a set or sequence.
  const std::vector<Value>& elements() const {
    if (is_set()) return as_set().elems;
    if (is_seq()) return as_seq().elems;
    throw Error("value is not a collection: " + to_string());
  }

  /// Semantic equality: numbers compare across int/real, sets ignore order.
  friend bool operator==(const Value& a, const Value& b) {
    if (a.is_number() && b.is_number()) {
      if (a.is_int() && b.is_int()) return a.as_int() == b.as_int();
      return a.as_number() == b.as_number();
    }
    if (a.v_.index() != b.v_.index()) return false;
    if (a.is_set()) {
      const auto& x = a.as_set().elems;
      const auto& y = b.as_set().elems;
      if (x.size() != y.size()) return false;
      for (const auto& e : x)
        if (!contains(y, e)) return false;
      return true;
    }
    if (a.is_seq()) {
      const auto& x = a.as_seq().elems;
      const auto& y = b.as_seq().elems;
      if (x.size() != y.size()) return false;
      for (size_t i = 0; i < x.size(); ++i)
        if (!(x[i] == y[i])) return false;
      return true;
    }
    if (a.is_object()) return a.as_object() == b.as_object();
    if (a.is_string()) return a.as_string() == b.as_string();
    if (a.is_bool()) return a.as_bool() == b.as_bool();
    return false;
  }
  friend bool operator!=(const Value& a, const Value& b) { return !(a == b); }

  static bool contains(const std::vector<Value>& vs, const Value& v) {
    for (const auto& e : vs)
      if (e == v) return true;
    return false;
  }

  /// Rendering used by the report and the eval command.
  /// Sets print as `{a, b}`, sequences as `Sequence{a, b}`, strings quoted.
  std::string to_string() const {
    if (is_string()) return quote(as_string());
    if (is_int()) return std::to_string(as_int());
    if (is_real()) return format_real(as_real());
    if (is_bool()) return as_bool() ? "true" : "false";
    if (is_object()) return as_object().label;
    if (is_set()) return "{" + join(as_set().elems) + "}";
    return "Sequence{" + join(as_seq().elems) + "}";
  }

  static std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
      if (c == '"' || c == '\\') out += '\\';
      out += c;
    }
    out += '"';
    return out;
  }

  static std::string format_real(double d) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.15g", d);
    return buf;
  }

  const Variant& raw() const { return v_; }

 private:
  template <class T>
  const T& get(const char* what) const {
    if (const T* p = std::get_if<T>(&v_)) return *p;
    throw Error(std::string("value is not a ") + what + ": " + to_string());
  }

  static std::string join(const std::vector<Value>& vs) {
    std::string out;
    for (size_t i = 0; i < vs.size(); ++i) {
      if (i) out += ", ";
      out += vs[i].to_string();
    }
    return out;
  }

  Variant v_;
};

/// Builds a set value, dropping duplicates while keeping first-seen order.
inline SetVal make_set(std::vector<Value> elems) {
  SetVal s;
  for (auto& e : elems) {
    if (!Value::contains(s.elems, e)) s.elems.push_back(std::move(e));
  }
  return s;
}

inline void set_insert(SetVal& s, Value v) {
  if (!Value::contains(s.elems, v)) s.elems.push_back(std::move(v));
}

}  // namespace uct
