#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "uct/activity.hpp"
#include "uct/expr.hpp"
#include "uct/model.hpp"

namespace uct {

/// A named, parameterized activity callable from expressions and call
/// statements.
struct Operation {
  std::vector<std::string> params;
  StmtPtr body;
};

using OpRegistry = std::map<std::string, Operation>;

/// Runaway guard for interpreted activities.
struct ExecLimits {
  long long loop_budget = 10'000'000;
  int max_call_depth = 256;
  int depth = 0;
};

/// Evaluation/execution context. Unqualified identifiers resolve in order:
/// binding, feature of `self`, class name (extent).
struct Env {
  Model* model = nullptr;
  const Model* pre_model = nullptr;  // target of `@pre`; current model if null
  std::optional<ObjectId> self;
  std::map<std::string, Value> bindings;
  const OpRegistry* ops = nullptr;
  ExecLimits* limits = nullptr;
};

namespace detail {

class BindGuard {
 public:
  BindGuard(Env& env, const std::string& name, Value v) : env_(env), name_(name) {
    auto it = env.bindings.find(name);
    if (it != env.bindings.end()) saved_ = it->second;
    env.bindings[name] = std::move(v);
  }
  ~BindGuard() {
    if (saved_) env_.bindings[name_] = std::move(*saved_);
    else env_.bindings.erase(name_);
  }

 private:
  Env& env_;
  std::string name_;
  std::optional<Value> saved_;
};

class SelfGuard {
 public:
  SelfGuard(Env& env, std::optional<ObjectId> self) : env_(env), saved_(env.self) {
    env_.self = std::move(self);
  }
  ~SelfGuard() { env_.self = std::move(saved_); }

 private:
  Env& env_;
  std::optional<ObjectId> saved_;
};

}  // namespace detail

inline Value evaluate(const Expr& e, Env& env);
inline Value evaluate(const ExprPtr& e, Env& env) { return evaluate(*e, env); }
inline std::optional<Value> exec_stmt(const Statement& s, Env& env);
inline std::optional<Value> exec_stmt(const StmtPtr& s, Env& env) {
  return exec_stmt(*s, env);
}

namespace detail {

inline const Model& pre_or_current(const Env& env) {
  return env.pre_model ? *env.pre_model : *env.model;
}

/// One navigation step from a value. Members of collections that no longer
/// exist in the model contribute nothing (they arise from @pre extents).
inline Value navigate(const Value& v, const std::string& member, Env& env) {
  const Model& m = *env.model;
  if (v.is_object()) return m.feature_value(v.as_object(), member);
  if (v.is_set() || v.is_seq()) {
    std::vector<Value> out;
    bool set_kind = v.is_set();
    for (const Value& e : v.elements()) {
      if (!e.is_object()) throw Error("cannot navigate ." + member + " from " + e.to_string());
      if (!m.exists(e.as_object())) continue;  // deleted since the pre snapshot
      Value r = m.feature_value(e.as_object(), member);
      if (r.is_set() || r.is_seq()) {
        for (const Value& x : r.elements()) out.push_back(x);
      } else {
        out.push_back(r);
      }
    }
    if (set_kind) return make_set(std::move(out));
    SeqVal s;
    s.elems = std::move(out);
    return s;
  }
  throw Error("cannot navigate ." + member + " from " + v.to_string());
}

inline Value extent_value(const Model& m, const std::string& cls) {
  SetVal s;
  for (const ObjectId& o : m.extent(cls)) s.elems.push_back(o);
  return s;
}

/// Resolution of the first path segment.
inline Value resolve_head(const std::string& name, bool at_pre, Env& env) {
  auto it = env.bindings.find(name);
  if (it != env.bindings.end()) return it->second;
  if (env.self) {
    const Model& m = at_pre ? pre_or_current(env) : *env.model;
    if (m.exists(*env.self)) {
      const std::string& cls = m.class_of(*env.self);
      if (m.metamodel().find_attribute(cls, name) || m.metamodel().find_role(cls, name))
        return m.feature_value(*env.self, name);
    }
  }
  if (env.model->metamodel().has(name))
    return extent_value(at_pre ? pre_or_current(env) : *env.model, name);
  throw Error("unbound identifier " + name);
}

inline bool truth(const Value& v, const char* what) {
  if (!v.is_bool()) throw Error(std::string(what) + " is not boolean: " + v.to_string());
  return v.as_bool();
}

inline Value eval_binary(const BinaryExpr& b, Env& env) {
  switch (b.op) {
    case BinOp::Implies: {
      if (!truth(evaluate(b.lhs, env), "operand of =>")) return Value(true);
      return Value(truth(evaluate(b.rhs, env), "operand of =>"));
    }
    case BinOp::Or: {
      if (truth(evaluate(b.lhs, env), "operand of or")) return Value(true);
      return Value(truth(evaluate(b.rhs, env), "operand of or"));
    }
    case BinOp::And: {
      if (!truth(evaluate(b.lhs, env), "operand of &")) return Value(false);
      return Value(truth(evaluate(b.rhs, env), "operand of &"));
    }
    default: break;
  }
  Value l = evaluate(b.lhs, env);
  Value r = evaluate(b.rhs, env);
  auto both_numbers = [&] { return l.is_number() && r.is_number(); };
  auto need = [&](bool ok, const char* what) {
    if (!ok)
      throw Error(std::string("cannot apply ") + detail::binop_text(b.op) + " to " +
                  l.to_string() + " and " + r.to_string() + " (" + what + ")");
  };
  switch (b.op) {
    case BinOp::Eq: return Value(l == r);
    case BinOp::Neq: return Value(l != r);
    case BinOp::Gt:
    case BinOp::Lt:
    case BinOp::Le:
    case BinOp::Ge: {
      int cmp;
      if (both_numbers()) {
        double x = l.as_number(), y = r.as_number();
        cmp = x < y ? -1 : (x > y ? 1 : 0);
      } else if (l.is_string() && r.is_string()) {
        cmp = l.as_string().compare(r.as_string());
        cmp = cmp < 0 ? -1 : (cmp > 0 ? 1 : 0);
      } else {
        need(false, "expects numbers or strings");
        return Value(false);
      }
      switch (b.op) {
        case BinOp::Gt: return Value(cmp > 0);
        case BinOp::Lt: return Value(cmp < 0);
        case BinOp::Le: return Value(cmp <= 0);
        default: return Value(cmp >= 0);
      }
    }
    case BinOp::In:
      need(r.is_collection(), "right operand of : must be a collection");
      return Value(Value::contains(r.elements(), l));
    case BinOp::NotIn:
      need(r.is_collection(), "right operand of /: must be a collection");
      return Value(!Value::contains(r.elements(), l));
    case BinOp::SubsetEq: {
      need(l.is_collection() && r.is_collection(), "expects collections");
      for (const Value& e : l.elements())
        if (!Value::contains(r.elements(), e)) return Value(false);
      return Value(true);
    }
    case BinOp::Add: {
      if (l.is_int() && r.is_int()) return Value(l.as_int() + r.as_int());
      if (both_numbers()) return Value(l.as_number() + r.as_number());
      if (l.is_string() && r.is_string()) return Value(l.as_string() + r.as_string());
      need(false, "expects numbers or strings");
      return Value();
    }
    case BinOp::Sub: {
      if (l.is_int() && r.is_int()) return Value(l.as_int() - r.as_int());
      if (both_numbers()) return Value(l.as_number() - r.as_number());
      if (l.is_collection() && r.is_collection()) {  // set difference
        SetVal out;
        for (const Value& e : l.elements())
          if (!Value::contains(r.elements(), e)) set_insert(out, e);
        return out;
      }
      need(false, "expects numbers or sets");
      return Value();
    }
    case BinOp::Mul: {
      if (l.is_int() && r.is_int()) return Value(l.as_int() * r.as_int());
      if (both_numbers()) return Value(l.as_number() * r.as_number());
      need(false, "expects numbers");
      return Value();
    }
    case BinOp::Div: {
      if (l.is_int() && r.is_int()) {
        need(r.as_int() != 0, "division by zero");
        return Value(l.as_int() / r.as_int());
      }
      if (both_numbers()) {
        need(r.as_number() != 0.0, "division by zero");
        return Value(l.as_number() / r.as_number());
      }
      need(false, "expects numbers");
      return Value();
    }
    case BinOp::Union: {
      need(l.is_collection() && r.is_collection(), "expects collections");
      SetVal out;
      for (const Value& e : l.elements()) set_insert(out, e);
      for (const Value& e : r.elements()) set_insert(out, e);
      return out;
    }
    case BinOp::Intersect: {
      need(l.is_collection() && r.is_collection(), "expects collections");
      SetVal out;
      for (const Value& e : l.elements())
        if (Value::contains(r.elements(), e)) set_insert(out, e);
      return out;
    }
    case BinOp::Concat: {
      need(l.is_seq() && r.is_seq(), "expects sequences");
      SeqVal out = l.as_seq();
      for (const Value& e : r.as_seq().elems) out.elems.push_back(e);
      return out;
    }
    default: throw Error("unhandled operator");
  }
}

inline std::optional<Value> invoke_operation(const CallExpr& c, Env& env, bool need_value);

inline Value eval_collection(const CollectionExpr& c, Env& env) {
  Value src = evaluate(c.source, env);
  switch (c.kind) {
    case CollKind::Any: {
      const auto& es = src.elements();
      if (es.empty()) throw Error("any() on empty collection");
      return es.front();
    }
    case CollKind::Size:
      return Value(static_cast<long long>(src.elements().size()));
    case CollKind::IsDeleted: {
      // true iff the receiver has no live instance(s)
      if (src.is_object()) return Value(!env.model->exists(src.as_object()));
      for (const Value& e : src.elements())
        if (e.is_object() && env.model->exists(e.as_object())) return Value(false);
      return Value(true);
    }
    default: break;
  }
  const auto& elems = src.elements();
  auto for_elem = [&](const Value& e, auto&& fn) -> bool {
    if (c.var) {
      detail::BindGuard g(env, *c.var, e);
      return fn();
    }
    // body without a bound variable: the element becomes the implicit self
    detail::SelfGuard g(env, e.is_object() ? std::optional<ObjectId>(e.as_object())
                                           : std::nullopt);
    return fn();
  };
  auto body_true = [&] { return truth(evaluate(c.body, env), "quantifier body"); };
  switch (c.kind) {
    case CollKind::Exists: {
      for (const Value& e : elems)
        if (for_elem(e, body_true)) return Value(true);
      return Value(false);
    }
    case CollKind::ForAll: {
      for (const Value& e : elems)
        if (!for_elem(e, body_true)) return Value(false);
      return Value(true);
    }
    case CollKind::Exists1: {
      int count = 0;
      for (const Value& e : elems)
        if (for_elem(e, body_true) && ++count > 1) return Value(false);
      return Value(count == 1);
    }
    case CollKind::Select:
    case CollKind::Reject: {
      bool keep_true = c.kind == CollKind::Select;
      std::vector<Value> out;
      for (const Value& e : elems)
        if (for_elem(e, body_true) == keep_true) out.push_back(e);
      if (src.is_set()) return make_set(std::move(out));
      SeqVal s;
      s.elems = std::move(out);
      return s;
    }
    default: throw Error("unhandled collection operator");
  }
}

inline Value eval_index(const IndexExpr& ix, Env& env) {
  const Model& m = *env.model;
  Value key = evaluate(ix.arg, env);
  if (key.is_collection()) {
    std::vector<Value> out;
    for (const Value& k : key.elements()) out.push_back(m.key_lookup(ix.name, k));
    if (key.is_set()) return make_set(std::move(out));
    SeqVal s;
    s.elems = std::move(out);
    return s;
  }
  return m.key_lookup(ix.name, key);
}

}  // namespace detail

/// Standard semantics. Logical operators short-circuit; `:` is membership
/// (a class name evaluates to its extent, so `x : C` doubles as a type
/// test); navigation over a collection maps and flattens; `E[x]` resolves
/// key values via the key index; `x@pre...` resolves its first segment in
/// the pre-state model.
inline Value evaluate(const Expr& e, Env& env) {
  if (!env.model) throw Error("no model installed");
  if (const auto* b = std::get_if<BinaryExpr>(&e.node)) return detail::eval_binary(*b, env);
  if (const auto* c = std::get_if<CollectionExpr>(&e.node))
    return detail::eval_collection(*c, env);
  if (const auto* s = std::get_if<SetLitExpr>(&e.node)) {
    std::vector<Value> out;
    for (const auto& el : s->elems) out.push_back(evaluate(el, env));
    return make_set(std::move(out));
  }
  if (const auto* s = std::get_if<SeqLitExpr>(&e.node)) {
    SeqVal out;
    for (const auto& el : s->elems) out.elems.push_back(evaluate(el, env));
    return out;
  }
  if (const auto* c = std::get_if<CallExpr>(&e.node)) {
    auto v = detail::invoke_operation(*c, env, true);
    return *v;
  }
  if (const auto* ix = std::get_if<IndexExpr>(&e.node)) return detail::eval_index(*ix, env);
  if (const auto* id = std::get_if<IdentExpr>(&e.node)) {
    Value v = detail::resolve_head(id->path[0], id->at_pre, env);
    for (size_t i = 1; i < id->path.size(); ++i) v = detail::navigate(v, id->path[i], env);
    return v;
  }
  if (const auto* n = std::get_if<NavExpr>(&e.node))
    return detail::navigate(evaluate(n->source, env), n->member, env);
  return std::get<LitExpr>(e.node).value;
}

inline bool evaluate_boolean(const Expr& e, Env& env) {
  Value v = evaluate(e, env);
  if (!v.is_bool())
    throw Error("expression is not boolean: " + print_expr(e) + " = " + v.to_string());
  return v.as_bool();
}
inline bool evaluate_boolean(const ExprPtr& e, Env& env) { return evaluate_boolean(*e, env); }

// ---------------------------------------------------------------------------
// Statement execution
// ---------------------------------------------------------------------------

namespace detail {

inline void charge_loop(Env& env) {
  if (env.limits && --env.limits->loop_budget < 0)
    throw Error("loop iteration budget exceeded");
}

/// Replace a many-end's contents with the object elements of `v`.
inline void assign_many(Model& m, const ObjectId& o, const std::string& role,
                        const Value& v) {
  m.clear_links(o, role);
  auto insert_one = [&](const Value& e) {
    if (!e.is_object())
      throw Error("cannot insert " + e.to_string() + " into role " + role);
    m.insert_link(o, role, e.as_object());
  };
  if (v.is_object()) insert_one(v);
  else if (v.is_collection())
    for (const Value& e : v.elements()) insert_one(e);
  else
    throw Error("cannot assign " + v.to_string() + " to many-valued role " + role);
}

inline void write_feature(Env& env, const ObjectId& o, const std::string& feature,
                          const Value& v) {
  Model& m = *env.model;
  const std::string& cls = m.class_of(o);
  if (m.metamodel().find_attribute(cls, feature)) {
    m.set_attr(o, feature, v);
    return;
  }
  const RoleDef* rd = m.metamodel().find_role(cls, feature);
  if (!rd) throw Error("class " + cls + " has no feature " + feature);
  if (rd->upper == Upper::Many) {
    assign_many(m, o, feature, v);
    return;
  }
  if (!v.is_object())
    throw Error("cannot assign " + v.to_string() + " to single-valued role " + feature);
  m.set_ref(o, feature, v.as_object());
}

/// Write `feature := v` on every object denoted by `owner` (an object or a
/// collection of objects; members deleted since a pre snapshot are skipped).
inline void write_broadcast(Env& env, const Value& owner, const std::string& feature,
                            const Value& v) {
  if (owner.is_object()) {
    write_feature(env, owner.as_object(), feature, v);
    return;
  }
  if (owner.is_collection()) {
    for (const Value& e : owner.elements()) {
      if (!e.is_object())
        throw Error("assignment target member is not an object: " + e.to_string());
      if (!env.model->exists(e.as_object())) continue;
      write_feature(env, e.as_object(), feature, v);
    }
    return;
  }
  throw Error("assignment target is not an object: " + owner.to_string());
}

inline void exec_assign(const AssignStmt& a, Env& env) {
  Value v = evaluate(a.value, env);
  if (const auto* id = std::get_if<IdentExpr>(&a.target->node)) {
    if (id->path.size() == 1) {
      if (id->at_pre) throw Error("cannot assign to " + print_expr(*a.target));
      const std::string& name = id->path[0];
      if (env.model->metamodel().has(name))
        throw Error("cannot assign to class " + name);
      // self feature, else a plain variable binding
      if (env.self && env.model->exists(*env.self)) {
        const std::string& cls = env.model->class_of(*env.self);
        if (env.model->metamodel().find_attribute(cls, name) ||
            env.model->metamodel().find_role(cls, name)) {
          write_feature(env, *env.self, name, v);
          return;
        }
      }
      env.bindings[name] = std::move(v);
      return;
    }
    // evaluate the path prefix, then write the final feature
    Value owner = resolve_head(id->path[0], id->at_pre, env);
    for (size_t i = 1; i + 1 < id->path.size(); ++i)
      owner = navigate(owner, id->path[i], env);
    write_broadcast(env, owner, id->path.back(), v);
    return;
  }
  if (const auto* n = std::get_if<NavExpr>(&a.target->node)) {
    Value owner = evaluate(n->source, env);
    write_broadcast(env, owner, n->member, v);
    return;
  }
  throw Error("invalid assignment target: " + print_expr(*a.target));
}

inline void exec_delete(const CollectionExpr& c, Env& env) {
  Value v = evaluate(c.source, env);
  std::vector<ObjectId> doomed;
  if (v.is_object()) {
    doomed.push_back(v.as_object());
  } else if (v.is_collection()) {
    for (const Value& e : v.elements())
      if (e.is_object()) doomed.push_back(e.as_object());
  } else {
    throw Error("isDeleted() needs an object or collection, got " + v.to_string());
  }
  for (const ObjectId& o : doomed)
    if (env.model->exists(o)) env.model->delete_object(o);
}

inline std::optional<Value> invoke_operation(const CallExpr& c, Env& env, bool need_value) {
  if (c.name == "constraint_check_failed") {
    std::string msg = "constraint check failed";
    if (!c.args.empty()) {
      Value v = evaluate(c.args[0], env);
      msg += ": " + (v.is_string() ? v.as_string() : v.to_string());
    }
    throw Error(msg);
  }
  if (!env.ops || !env.ops->count(c.name))
    throw Error("unknown operation " + c.name);
  const Operation& op = env.ops->at(c.name);
  if (op.params.size() != c.args.size())
    throw Error("operation " + c.name + " expects " + std::to_string(op.params.size()) +
                " arguments, got " + std::to_string(c.args.size()));
  Env inner;
  inner.model = env.model;
  inner.pre_model = env.pre_model;
  inner.ops = env.ops;
  inner.limits = env.limits;
  for (size_t i = 0; i < op.params.size(); ++i)
    inner.bindings[op.params[i]] = evaluate(c.args[i], env);
  if (inner.limits && ++inner.limits->depth > inner.limits->max_call_depth)
    throw Error("operation call depth exceeded");
  auto result = exec_stmt(op.body, inner);
  if (inner.limits) --inner.limits->depth;
  if (need_value && !result)
    throw Error("operation " + c.name + " did not return a value");
  return result;
}

}  // namespace detail

/// Executes a statement. The result is the value of an executed `return`,
/// which also stops the enclosing activity or operation call.
inline std::optional<Value> exec_stmt(const Statement& s, Env& env) {
  if (!env.limits) {
    ExecLimits limits;
    env.limits = &limits;
    auto restore = [&env]() { env.limits = nullptr; };
    try {
      auto r = exec_stmt(s, env);
      restore();
      return r;
    } catch (...) {
      restore();
      throw;
    }
  }
  if (const auto* w = std::get_if<WhileStmt>(&s.node)) {
    while (evaluate_boolean(w->cond, env)) {
      detail::charge_loop(env);
      auto r = exec_stmt(w->body, env);
      if (r) return r;
    }
    return std::nullopt;
  }
  if (const auto* f = std::get_if<ForStmt>(&s.node)) {
    Value range = evaluate(f->range, env);
    if (!range.is_collection())
      throw Error("for-range is not a collection: " + range.to_string());
    const std::vector<Value> frozen = range.elements();  // snapshot semantics
    for (const Value& e : frozen) {
      detail::charge_loop(env);
      detail::BindGuard g(env, f->var, e);
      auto r = exec_stmt(f->body, env);
      if (r) return r;
    }
    return std::nullopt;
  }
  if (const auto* i = std::get_if<IfStmt>(&s.node)) {
    if (evaluate_boolean(i->cond, env)) return exec_stmt(i->then_branch, env);
    return exec_stmt(i->else_branch, env);
  }
  if (const auto* q = std::get_if<SeqStmt>(&s.node)) {
    auto r = exec_stmt(q->first, env);
    if (r) return r;
    return exec_stmt(q->second, env);
  }
  if (const auto* c = std::get_if<CreateStmt>(&s.node)) {
    ObjectId o = env.model->create_object(c->class_name);
    env.bindings[c->var] = o;
    return std::nullopt;
  }
  if (const auto* a = std::get_if<AssignStmt>(&s.node)) {
    detail::exec_assign(*a, env);
    return std::nullopt;
  }
  if (std::get_if<SkipStmt>(&s.node)) return std::nullopt;
  if (const auto* r = std::get_if<ReturnStmt>(&s.node)) return evaluate(r->value, env);
  const auto& x = std::get<ExprStmt>(s.node);
  if (const auto* call = std::get_if<CallExpr>(&x.expr->node)) {
    detail::invoke_operation(*call, env, false);
    return std::nullopt;
  }
  if (const auto* coll = std::get_if<CollectionExpr>(&x.expr->node)) {
    if (coll->kind == CollKind::IsDeleted) {
      detail::exec_delete(*coll, env);
      return std::nullopt;
    }
  }
  throw Error("expression is not executable: " + print_expr(x.expr));
}

// ---------------------------------------------------------------------------
// Static analysis: free variables and read/write frames
// ---------------------------------------------------------------------------

namespace detail {

inline void free_vars_walk(const Expr& e, const Metamodel* mm, std::set<std::string>& bound,
                           std::set<std::string>& out) {
  if (const auto* b = std::get_if<BinaryExpr>(&e.node)) {
    free_vars_walk(*b->lhs, mm, bound, out);
    free_vars_walk(*b->rhs, mm, bound, out);
    return;
  }
  if (const auto* c = std::get_if<CollectionExpr>(&e.node)) {
    free_vars_walk(*c->source, mm, bound, out);
    if (c->body) {
      bool added = c->var && !bound.count(*c->var);
      if (added) bound.insert(*c->var);
      free_vars_walk(*c->body, mm, bound, out);
      if (added) bound.erase(*c->var);
    }
    return;
  }
  if (const auto* s = std::get_if<SetLitExpr>(&e.node)) {
    for (const auto& el : s->elems) free_vars_walk(*el, mm, bound, out);
    return;
  }
  if (const auto* s = std::get_if<SeqLitExpr>(&e.node)) {
    for (const auto& el : s->elems) free_vars_walk(*el, mm, bound, out);
    return;
  }
  if (const auto* c = std::get_if<CallExpr>(&e.node)) {
    for (const auto& a : c->args) free_vars_walk(*a, mm, bound, out);
    return;
  }
  if (const auto* ix = std::get_if<IndexExpr>(&e.node)) {
    free_vars_walk(*ix->arg, mm, bound, out);
    return;
  }
  if (const auto* id = std::get_if<IdentExpr>(&e.node)) {
    const std::string& head = id->path[0];
    if (!bound.count(head) && !(mm && mm->has(head))) out.insert(head);
    return;
  }
  if (const auto* n = std::get_if<NavExpr>(&e.node)) {
    free_vars_walk(*n->source, mm, bound, out);
    return;
  }
}

}  // namespace detail

/// Identifiers not bound by an enclosing exists/exists1/forAll and (when a
/// metamodel is given) not class names.
inline std::set<std::string> free_vars(const Expr& e, const Metamodel* mm = nullptr) {
  std::set<std::string> bound, out;
  detail::free_vars_walk(e, mm, bound, out);
  return out;
}
inline std::set<std::string> free_vars(const ExprPtr& e, const Metamodel* mm = nullptr) {
  return free_vars(*e, mm);
}

/// Inferred static type of an expression: a class of objects, a primitive,
/// or unknown.
struct StaticType {
  enum Kind { Objects, Primitive, Unknown } kind = Unknown;
  std::string cls;

  static StaticType objects(std::string c) { return {Objects, std::move(c)}; }
  static StaticType primitive() { return {Primitive, {}}; }
  static StaticType unknown() { return {Unknown, {}}; }
  bool is_objects() const { return kind == Objects; }
};

using TypeEnv = std::map<std::string, StaticType>;

/// Statically computed write/read sets. Entries are "Class.feature" (the
/// declaring class) or "Class" for an extent (creation/deletion/iteration).
struct Frame {
  std::set<std::string> writes;
  std::set<std::string> reads;
};

namespace detail {

struct FrameCtx {
  const Metamodel* mm;
  TypeEnv types;
  std::vector<StaticType> self_stack;  // implicit-self element types
};

inline StaticType nav_type(const FrameCtx& ctx, const StaticType& t,
                           const std::string& member) {
  if (!t.is_objects()) return StaticType::unknown();
  if (ctx.mm->find_attribute(t.cls, member)) return StaticType::primitive();
  if (const RoleDef* r = ctx.mm->find_role(t.cls, member))
    return StaticType::objects(r->target_class);
  return StaticType::unknown();
}

inline StaticType head_type(const FrameCtx& ctx, const std::string& head) {
  auto it = ctx.types.find(head);
  if (it != ctx.types.end()) return it->second;
  if (ctx.mm->has(head)) return StaticType::objects(head);
  for (auto st = ctx.self_stack.rbegin(); st != ctx.self_stack.rend(); ++st) {
    if (st->is_objects() && (ctx.mm->find_attribute(st->cls, head) ||
                             ctx.mm->find_role(st->cls, head)))
      return nav_type(ctx, *st, head);
  }
  return StaticType::unknown();
}

inline StaticType static_type(const Expr& e, const FrameCtx& ctx) {
  if (const auto* b = std::get_if<BinaryExpr>(&e.node)) {
    switch (b->op) {
      case BinOp::Union:
      case BinOp::Intersect:
      case BinOp::Concat:
      case BinOp::Sub: {
        StaticType l = static_type(*b->lhs, ctx);
        if (l.kind != StaticType::Unknown) return l;
        return static_type(*b->rhs, ctx);
      }
      default: return StaticType::primitive();
    }
  }
  if (const auto* c = std::get_if<CollectionExpr>(&e.node)) {
    switch (c->kind) {
      case CollKind::Any:
      case CollKind::Select:
      case CollKind::Reject: return static_type(*c->source, ctx);
      default: return StaticType::primitive();
    }
  }
  if (const auto* s = std::get_if<SetLitExpr>(&e.node)) {
    for (const auto& el : s->elems) {
      StaticType t = static_type(*el, ctx);
      if (t.kind != StaticType::Unknown) return t;
    }
    return StaticType::unknown();
  }
  if (const auto* s = std::get_if<SeqLitExpr>(&e.node)) {
    for (const auto& el : s->elems) {
      StaticType t = static_type(*el, ctx);
      if (t.kind != StaticType::Unknown) return t;
    }
    return StaticType::unknown();
  }
  if (std::get_if<CallExpr>(&e.node)) return StaticType::unknown();
  if (const auto* ix = std::get_if<IndexExpr>(&e.node)) {
    if (ctx.mm->has(ix->name)) return StaticType::objects(ix->name);
    return StaticType::unknown();
  }
  if (const auto* id = std::get_if<IdentExpr>(&e.node)) {
    StaticType t = head_type(ctx, id->path[0]);
    for (size_t i = 1; i < id->path.size(); ++i) t = nav_type(ctx, t, id->path[i]);
    return t;
  }
  if (const auto* n = std::get_if<NavExpr>(&e.node))
    return nav_type(ctx, static_type(*n->source, ctx), n->member);
  return StaticType::primitive();
}

/// Where an `lhs = rhs` (or `e : coll`) can write: the final feature of a
/// navigable location, with its declaring class.
struct WritePath {
  bool writable = false;
  std::string cls;      // declaring class of `feature`
  std::string feature;
};

inline void frame_read(const Expr& e, FrameCtx& ctx, Frame& f);

inline WritePath resolve_write_path(const Expr& e, FrameCtx& ctx, Frame& f,
                                    bool collect_reads) {
  // Ident path: resolve all but the last segment as reads.
  if (const auto* id = std::get_if<IdentExpr>(&e.node)) {
    if (id->path.size() < 2) {
      // single segment: writable only as an implicit-self feature
      for (auto st = ctx.self_stack.rbegin(); st != ctx.self_stack.rend(); ++st) {
        if (st->is_objects() && !ctx.types.count(id->path[0]) &&
            (ctx.mm->find_attribute(st->cls, id->path[0]) ||
             ctx.mm->find_role(st->cls, id->path[0])))
          return {true, ctx.mm->declaring_class(st->cls, id->path[0]), id->path[0]};
      }
      return {};
    }
    StaticType t = head_type(ctx, id->path[0]);
    if (ctx.mm->has(id->path[0]) && !id->at_pre && collect_reads)
      f.reads.insert(id->path[0]);
    for (size_t i = 1; i + 1 < id->path.size(); ++i) {
      if (t.is_objects() && collect_reads &&
          (ctx.mm->find_attribute(t.cls, id->path[i]) || ctx.mm->find_role(t.cls, id->path[i])))
        f.reads.insert(ctx.mm->declaring_class(t.cls, id->path[i]) + "." + id->path[i]);
      t = nav_type(ctx, t, id->path[i]);
    }
    if (!t.is_objects()) return {};
    const std::string& last = id->path.back();
    if (!ctx.mm->find_attribute(t.cls, last) && !ctx.mm->find_role(t.cls, last)) return {};
    return {true, ctx.mm->declaring_class(t.cls, last), last};
  }
  if (const auto* n = std::get_if<NavExpr>(&e.node)) {
    StaticType t = static_type(*n->source, ctx);
    if (!t.is_objects()) return {};
    if (!ctx.mm->find_attribute(t.cls, n->member) && !ctx.mm->find_role(t.cls, n->member))
      return {};
    if (collect_reads) frame_read(*n->source, ctx, f);
    return {true, ctx.mm->declaring_class(t.cls, n->member), n->member};
  }
  return {};
}

inline void frame_read(const Expr& e, FrameCtx& ctx, Frame& f) {
  if (const auto* b = std::get_if<BinaryExpr>(&e.node)) {
    frame_read(*b->lhs, ctx, f);
    frame_read(*b->rhs, ctx, f);
    return;
  }
  if (const auto* c = std::get_if<CollectionExpr>(&e.node)) {
    frame_read(*c->source, ctx, f);
    if (c->body) {
      StaticType elem = static_type(*c->source, ctx);
      if (c->var) {
        FrameCtx inner = ctx;
        inner.types[*c->var] = elem;
        frame_read(*c->body, inner, f);
      } else {
        ctx.self_stack.push_back(elem);
        frame_read(*c->body, ctx, f);
        ctx.self_stack.pop_back();
      }
    }
    return;
  }
  if (const auto* s = std::get_if<SetLitExpr>(&e.node)) {
    for (const auto& el : s->elems) frame_read(*el, ctx, f);
    return;
  }
  if (const auto* s = std::get_if<SeqLitExpr>(&e.node)) {
    for (const auto& el : s->elems) frame_read(*el, ctx, f);
    return;
  }
  if (const auto* c = std::get_if<CallExpr>(&e.node)) {
    for (const auto& a : c->args) frame_read(*a, ctx, f);
    return;
  }
  if (const auto* ix = std::get_if<IndexExpr>(&e.node)) {
    if (ctx.mm->has(ix->name)) {
      f.reads.insert(ix->name);
      if (const AttributeDef* k = ctx.mm->key_attribute(ix->name))
        f.reads.insert(ctx.mm->declaring_class(ix->name, k->name) + "." + k->name);
    }
    frame_read(*ix->arg, ctx, f);
    return;
  }
  if (const auto* id = std::get_if<IdentExpr>(&e.node)) {
    const std::string& head = id->path[0];
    StaticType t;
    if (ctx.types.count(head)) {
      t = ctx.types.at(head);
    } else if (ctx.mm->has(head)) {
      if (!id->at_pre) f.reads.insert(head);
      t = StaticType::objects(head);
    } else {
      // possibly an implicit-self feature
      bool found = false;
      for (auto st = ctx.self_stack.rbegin(); st != ctx.self_stack.rend(); ++st) {
        if (st->is_objects() && (ctx.mm->find_attribute(st->cls, head) ||
                                 ctx.mm->find_role(st->cls, head))) {
          f.reads.insert(ctx.mm->declaring_class(st->cls, head) + "." + head);
          t = nav_type(ctx, *st, head);
          found = true;
          break;
        }
      }
      if (!found) t = StaticType::unknown();
    }
    for (size_t i = 1; i < id->path.size(); ++i) {
      if (t.is_objects() && (ctx.mm->find_attribute(t.cls, id->path[i]) ||
                             ctx.mm->find_role(t.cls, id->path[i])))
        f.reads.insert(ctx.mm->declaring_class(t.cls, id->path[i]) + "." + id->path[i]);
      t = nav_type(ctx, t, id->path[i]);
    }
    return;
  }
  if (const auto* n = std::get_if<NavExpr>(&e.node)) {
    frame_read(*n->source, ctx, f);
    StaticType t = static_type(*n->source, ctx);
    if (t.is_objects() && (ctx.mm->find_attribute(t.cls, n->member) ||
                           ctx.mm->find_role(t.cls, n->member)))
      f.reads.insert(ctx.mm->declaring_class(t.cls, n->member) + "." + n->member);
    return;
  }
}

inline bool classes_related(const Metamodel& mm, const std::string& a,
                            const std::string& b) {
  return mm.subtype(a, b) || mm.subtype(b, a);
}

inline void flatten_and(const ExprPtr& e, std::vector<ExprPtr>& out) {
  if (const auto* b = std::get_if<BinaryExpr>(&e->node)) {
    if (b->op == BinOp::And) {
      flatten_and(b->lhs, out);
      flatten_and(b->rhs, out);
      return;
    }
  }
  out.push_back(e);
}

/// Type-test conjuncts (`v : ClassName`) in a guard narrow the variable's
/// static type inside the guarded consequent.
inline TypeEnv narrow_by_guard(const ExprPtr& guard, const TypeEnv& types,
                               const Metamodel& mm) {
  TypeEnv out = types;
  std::vector<ExprPtr> conjuncts;
  flatten_and(guard, conjuncts);
  for (const auto& c : conjuncts) {
    const auto* b = std::get_if<BinaryExpr>(&c->node);
    if (!b || b->op != BinOp::In) continue;
    const auto* v = std::get_if<IdentExpr>(&b->lhs->node);
    const auto* cls = std::get_if<IdentExpr>(&b->rhs->node);
    if (v && cls && v->path.size() == 1 && cls->path.size() == 1 && !v->at_pre &&
        !cls->at_pre && mm.has(cls->path[0]))
      out[v->path[0]] = StaticType::objects(cls->path[0]);
  }
  return out;
}

inline void frame_delete_writes(const std::string& cls, FrameCtx& ctx, Frame& f) {
  const Metamodel& mm = *ctx.mm;
  f.writes.insert(cls);
  // own features of the deleted family (subtypes die with the extent)
  std::set<std::string> fam;
  for (const std::string& c : mm.family(cls)) fam.insert(c);
  for (const std::string& c : mm.family(cls))
    for (const ClassDef* anc : mm.ancestors(c)) fam.insert(anc->name);
  for (const std::string& c : fam) {
    const ClassDef& cd = mm.at(c);
    for (const auto& a : cd.attributes) f.writes.insert(c + "." + a.name);
    for (const auto& r : cd.roles) f.writes.insert(c + "." + r.name);
  }
  // incoming roles anywhere that can target the deleted instances
  for (const auto& c : mm.classes())
    for (const auto& r : c.roles)
      if (classes_related(mm, r.target_class, cls)) f.writes.insert(c.name + "." + r.name);
}

inline void frame_update(const Expr& e, FrameCtx& ctx, Frame& f) {
  if (const auto* b = std::get_if<BinaryExpr>(&e.node)) {
    if (b->op == BinOp::And) {
      frame_update(*b->lhs, ctx, f);
      frame_update(*b->rhs, ctx, f);
      return;
    }
    if (b->op == BinOp::Implies) {
      frame_read(*b->lhs, ctx, f);
      FrameCtx inner = ctx;
      inner.types = narrow_by_guard(b->lhs, ctx.types, *ctx.mm);
      frame_update(*b->rhs, inner, f);
      return;
    }
    if (b->op == BinOp::Eq) {
      WritePath wp = resolve_write_path(*b->lhs, ctx, f, true);
      if (wp.writable) {
        f.writes.insert(wp.cls + "." + wp.feature);
        frame_read(*b->rhs, ctx, f);
        return;
      }
      frame_read(e, ctx, f);
      return;
    }
    if (b->op == BinOp::In) {
      // membership of a writable many-end is an insertion
      WritePath wp = resolve_write_path(*b->rhs, ctx, f, false);
      if (wp.writable) {
        const RoleDef* rd = ctx.mm->find_role(wp.cls, wp.feature);
        if (rd && rd->upper == Upper::Many) {
          resolve_write_path(*b->rhs, ctx, f, true);
          f.writes.insert(wp.cls + "." + wp.feature);
          frame_read(*b->lhs, ctx, f);
          return;
        }
      }
      frame_read(e, ctx, f);
      return;
    }
    frame_read(e, ctx, f);
    return;
  }
  if (const auto* c = std::get_if<CollectionExpr>(&e.node)) {
    if ((c->kind == CollKind::Exists || c->kind == CollKind::Exists1) && c->var) {
      const auto* src = std::get_if<IdentExpr>(&c->source->node);
      if (src && src->path.size() == 1 && ctx.mm->has(src->path[0])) {
        f.writes.insert(src->path[0]);  // creation
        FrameCtx inner = ctx;
        inner.types[*c->var] = StaticType::objects(src->path[0]);
        frame_update(*c->body, inner, f);
        return;
      }
    }
    if (c->kind == CollKind::IsDeleted) {
      StaticType t = static_type(*c->source, ctx);
      frame_read(*c->source, ctx, f);
      if (t.is_objects()) frame_delete_writes(t.cls, ctx, f);
      return;
    }
    frame_read(e, ctx, f);
    return;
  }
  frame_read(e, ctx, f);
}

}  // namespace detail

/// Read/write frame of a constraint succedent. Writes are features assigned
/// or inserted into and classes instantiated or deleted; reads are every
/// other feature or extent reference (`@pre` extents are not current-state
/// reads).
inline Frame frames(const Expr& succedent, const Metamodel& mm, const TypeEnv& types = {}) {
  detail::FrameCtx ctx{&mm, types, {}};
  Frame f;
  detail::frame_update(succedent, ctx, f);
  return f;
}
inline Frame frames(const ExprPtr& succedent, const Metamodel& mm,
                    const TypeEnv& types = {}) {
  return frames(*succedent, mm, types);
}

/// Reads alone (used for antecedents and quantifier ranges).
inline Frame frame_reads(const Expr& e, const Metamodel& mm, const TypeEnv& types = {}) {
  detail::FrameCtx ctx{&mm, types, {}};
  Frame f;
  detail::frame_read(e, ctx, f);
  return f;
}
inline Frame frame_reads(const ExprPtr& e, const Metamodel& mm, const TypeEnv& types = {}) {
  return frame_reads(*e, mm, types);
}

}  // namespace uct
