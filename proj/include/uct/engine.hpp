#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "uct/eval.hpp"
#include "uct/model.hpp"

namespace uct {

/// A succedent uses a form the phase compiler cannot realize.
class UnsupportedConstruct : public Error {
 public:
  using Error::Error;
};

/// One quantifier of a constraint beyond its scope: `var : range`.
struct Quantifier {
  std::string var;
  ExprPtr range;
};

/// A use-case postcondition: optionally scoped over one class's extent,
/// with extra quantifiers, an optional antecedent (guard), and a succedent
/// to establish. Inside the body the scope instance's features may be
/// referenced unqualified, or explicitly through the scope variable (the
/// lowercase initials of the scope class: Figure -> f).
struct Constraint {
  std::string name;
  std::optional<std::string> scope_class;  // nullopt: global, executed once
  std::string scope_var;
  std::vector<Quantifier> quantifiers;
  ExprPtr antecedent;  // may be null
  ExprPtr succedent;
};

/// A transformation use case: assumptions (checked before running) and an
/// ordered list of constraints (each compiled into one phase).
struct UseCase {
  std::string name;
  std::vector<ExprPtr> assumptions;
  std::vector<Constraint> constraints;
};

/// A compiled constraint: the activity realizing it plus its write/read
/// frame (succedent frame extended with antecedent, range, and scope reads).
struct Phase {
  Constraint constraint;
  StmtPtr activity;
  Frame frame;
};

struct RunOptions {
  bool force = false;   // run even when assumptions fail
  bool verify = true;   // post-verify every constraint after the phases
};

struct PhaseReport {
  std::string name;
  long long iterations = 0;
  std::map<std::string, int> created;
  int link_changes = 0;
};

struct VerifyResult {
  std::string constraint;
  bool ok = false;
  std::string detail;  // counterexample bindings or evaluation error
};

struct RunReport {
  std::string usecase;
  bool forced = false;
  bool executed = false;
  std::vector<std::string> asm_failures;
  std::vector<std::string> warnings;
  std::vector<std::string> phase_order;
  std::vector<PhaseReport> phases;
  std::vector<VerifyResult> verification;

  bool ok() const {
    if (!executed) return false;
    if (!asm_failures.empty() && !forced) return false;
    for (const auto& v : verification)
      if (!v.ok) return false;
    return true;
  }

  std::string to_text() const {
    std::ostringstream os;
    os << "use case " << usecase << "\n";
    for (const auto& a : asm_failures) os << "  assumption failed: " << a << "\n";
    if (!asm_failures.empty() && !executed)
      os << "  aborted: assumptions do not hold\n";
    for (const auto& w : warnings) os << "  warning: " << w << "\n";
    if (executed) {
      os << "  order:";
      for (const auto& p : phase_order) os << " " << p;
      os << "\n";
      for (const auto& p : phases) {
        os << "  phase " << p.name << ": iterations " << p.iterations;
        if (!p.created.empty()) {
          os << ", created";
          for (const auto& [cls, n] : p.created) os << " " << cls << " " << n;
        }
        os << ", links changed " << p.link_changes << "\n";
      }
      for (const auto& v : verification) {
        os << "  verify " << v.constraint << ": " << (v.ok ? "PASS" : "FAIL");
        if (!v.ok) os << " (" << v.detail << ")";
        os << "\n";
      }
    }
    os << "  result: " << (ok() ? "PASS" : "FAIL") << "\n";
    return os.str();
  }
};

// ---------------------------------------------------------------------------
// Use-case file parsing
// ---------------------------------------------------------------------------
//
//   usecase ::= "usecase" IDENT "{" ("assume" expr ";")*
//                                   ("constraint" IDENT ":" scope "::" expr ";")* "}"
//   scope   ::= "$global" | IDENT (";" IDENT ":" expr)*

namespace detail {

/// Rewrites unqualified scope-class features to scope_var.feature and
/// rejects identifiers that resolve to nothing. `types` binds the scope
/// variable and quantifier variables.
class Qualifier {
 public:
  Qualifier(const Metamodel& mm, const Constraint& c, TypeEnv types)
      : mm_(mm), name_(c.name), types_(std::move(types)) {
    if (c.scope_class) scope_ = StaticType::objects(*c.scope_class);
    scope_var_ = c.scope_var;
  }

  ExprPtr rewrite(const ExprPtr& e) {
    FrameCtx ctx{&mm_, types_, {}};
    return walk(e, ctx);
  }

  /// Element type of an expression under the current typing.
  StaticType type_of(const ExprPtr& e) const {
    FrameCtx ctx{&mm_, types_, {}};
    return static_type(*e, ctx);
  }

  void bind(const std::string& var, StaticType t) { types_[var] = std::move(t); }
  const TypeEnv& types() const { return types_; }

 private:
  ExprPtr walk(const ExprPtr& e, FrameCtx& ctx) {
    if (const auto* b = std::get_if<BinaryExpr>(&e->node)) {
      ExprPtr l = walk(b->lhs, ctx);
      ExprPtr r = walk(b->rhs, ctx);
      return make_expr<BinaryExpr>(b->op, std::move(l), std::move(r));
    }
    if (const auto* c = std::get_if<CollectionExpr>(&e->node)) {
      ExprPtr src = walk(c->source, ctx);
      if (!c->body)
        return make_expr<CollectionExpr>(c->kind, std::move(src), c->var, nullptr);
      StaticType elem = static_type(*src, ctx);
      ExprPtr body;
      if (c->var) {
        FrameCtx inner = ctx;
        inner.types[*c->var] = elem;
        body = walk(c->body, inner);
      } else {
        ctx.self_stack.push_back(elem);
        body = walk(c->body, ctx);
        ctx.self_stack.pop_back();
      }
      return make_expr<CollectionExpr>(c->kind, std::move(src), c->var, std::move(body));
    }
    if (const auto* s = std::get_if<SetLitExpr>(&e->node)) {
      SetLitExpr out;
      for (const auto& el : s->elems) out.elems.push_back(walk(el, ctx));
      return make_expr<SetLitExpr>(std::move(out));
    }
    if (const auto* s = std::get_if<SeqLitExpr>(&e->node)) {
      SeqLitExpr out;
      for (const auto& el : s->elems) out.elems.push_back(walk(el, ctx));
      return make_expr<SeqLitExpr>(std::move(out));
    }
    if (const auto* c = std::get_if<CallExpr>(&e->node)) {
      CallExpr out{c->name, {}};
      for (const auto& a : c->args) out.args.push_back(walk(a, ctx));
      return make_expr<CallExpr>(std::move(out));
    }
    if (const auto* ix = std::get_if<IndexExpr>(&e->node)) {
      if (!mm_.has(ix->name))
        throw Error("constraint " + name_ + ": unknown class " + ix->name + " in " +
                    print_expr(*e));
      return make_expr<IndexExpr>(ix->name, walk(ix->arg, ctx));
    }
    if (const auto* id = std::get_if<IdentExpr>(&e->node)) {
      const std::string& head = id->path[0];
      if (ctx.types.count(head) || mm_.has(head)) return e;
      // feature of an enclosing implicit-self element?
      for (auto st = ctx.self_stack.rbegin(); st != ctx.self_stack.rend(); ++st)
        if (st->is_objects() && (mm_.find_attribute(st->cls, head) ||
                                 mm_.find_role(st->cls, head)))
          return e;
      // unqualified scope feature?
      if (scope_ && (mm_.find_attribute(scope_->cls, head) ||
                     mm_.find_role(scope_->cls, head))) {
        if (id->at_pre)
          throw Error("constraint " + name_ + ": @pre on unqualified feature " + head +
                      " is not supported");
        IdentExpr out = *id;
        out.path.insert(out.path.begin(), scope_var_);
        return make_expr<IdentExpr>(std::move(out));
      }
      throw Error("constraint " + name_ + ": unbound identifier " + head);
    }
    if (const auto* n = std::get_if<NavExpr>(&e->node))
      return make_expr<NavExpr>(walk(n->source, ctx), n->member);
    return e;  // literal
  }

  const Metamodel& mm_;
  std::string name_;
  TypeEnv types_;
  std::optional<StaticType> scope_;
  std::string scope_var_;
};

}  // namespace detail

inline std::vector<UseCase> parse_usecases(const Metamodel& mm, std::string_view text);

// ---------------------------------------------------------------------------
// Constraint compilation
// ---------------------------------------------------------------------------

namespace detail {

inline StmtPtr seq_of(StmtPtr a, StmtPtr b) {
  if (!a) return b;
  if (!b) return a;
  return make_stmt<SeqStmt>(std::move(a), std::move(b));
}

inline StmtPtr check_stmt(const ExprPtr& cond) {
  CallExpr fail{"constraint_check_failed", {make_expr<LitExpr>(Value(print_expr(cond)))}};
  return make_stmt<IfStmt>(cond, make_stmt<SkipStmt>(),
                           make_stmt<ExprStmt>(make_expr<CallExpr>(std::move(fail))));
}

/// Translates a succedent into statements:
///   exists1 v:E with leading key equation  -> lookup-or-create by key
///   exists / exists1 v:E                   -> create unless already satisfied
///   lhs = rhs (writable lhs)               -> assignment
///   lhs = rhs (read-only lhs)              -> runtime check
///   e : coll (writable many-end)           -> set-insertion
///   A implies B                            -> conditional
///   A and B                                -> textual sequence
///   E->isDeleted()                         -> cascading deletion
/// Anything else is an unsupported construct.
class Realizer {
 public:
  Realizer(const Metamodel& mm, std::string constraint_name)
      : mm_(mm), name_(std::move(constraint_name)) {}

  StmtPtr realize(const ExprPtr& e, TypeEnv& types) {
    if (const auto* b = std::get_if<BinaryExpr>(&e->node)) {
      if (b->op == BinOp::And) {
        StmtPtr first = realize(b->lhs, types);
        StmtPtr second = realize(b->rhs, types);
        return seq_of(std::move(first), std::move(second));
      }
      if (b->op == BinOp::Implies) {
        TypeEnv inner = narrow_by_guard(b->lhs, types, mm_);
        return make_stmt<IfStmt>(b->lhs, realize(b->rhs, inner), make_stmt<SkipStmt>());
      }
      if (b->op == BinOp::Eq) {
        if (writable(b->lhs, types))
          return make_stmt<AssignStmt>(b->lhs, b->rhs);
        return check_stmt(e);
      }
      if (b->op == BinOp::In) {
        if (writable_many(b->rhs, types)) {
          SetLitExpr single;
          single.elems.push_back(b->lhs);
          ExprPtr rhs = make_expr<BinaryExpr>(BinOp::Union, b->rhs,
                                              make_expr<SetLitExpr>(std::move(single)));
          return make_stmt<AssignStmt>(b->rhs, std::move(rhs));
        }
        return check_stmt(e);
      }
      unsupported(e);
    }
    if (const auto* c = std::get_if<CollectionExpr>(&e->node)) {
      if (c->kind == CollKind::IsDeleted) return make_stmt<ExprStmt>(e);
      if ((c->kind == CollKind::Exists || c->kind == CollKind::Exists1) && c->var)
        return realize_exists(*c, e, types);
      unsupported(e);
    }
    if (const auto* l = std::get_if<LitExpr>(&e->node)) {
      if (l->value.is_bool() && l->value.as_bool()) return make_stmt<SkipStmt>();
      unsupported(e);
    }
    unsupported(e);
  }

 private:
  [[noreturn]] void unsupported(const ExprPtr& e) {
    throw UnsupportedConstruct("constraint " + name_ +
                               ": unsupported construct in succedent: " + print_expr(*e));
  }

  bool writable(const ExprPtr& lhs, const TypeEnv& types) const {
    FrameCtx ctx{&mm_, types, {}};
    Frame scratch;
    return resolve_write_path(*lhs, ctx, scratch, false).writable;
  }

  bool writable_many(const ExprPtr& coll, const TypeEnv& types) const {
    FrameCtx ctx{&mm_, types, {}};
    Frame scratch;
    WritePath wp = resolve_write_path(*coll, ctx, scratch, false);
    if (!wp.writable) return false;
    const RoleDef* rd = mm_.find_role(wp.cls, wp.feature);
    return rd && rd->upper == Upper::Many;
  }

  /// `E->exists1( v | v.key = k & P )` becomes
  ///   if E->exists( v | v.key = k ) then v := E[k]
  ///   else ( v : E ; v.key := k ) ; realize(P)
  /// Without a key equation (and for plain exists) the whole body is the
  /// witness test: if E->exists( v | P ) then skip else ( v : E ; realize(P) ).
  StmtPtr realize_exists(const CollectionExpr& c, const ExprPtr& whole, TypeEnv& types) {
    const auto* src = std::get_if<IdentExpr>(&c.source->node);
    if (!src || src->path.size() != 1 || !mm_.has(src->path[0]) || src->at_pre)
      unsupported(whole);
    const std::string& cls = src->path[0];
    const std::string& var = *c.var;
    TypeEnv inner = types;
    inner[var] = StaticType::objects(cls);

    if (c.kind == CollKind::Exists1) {
      std::vector<ExprPtr> conjuncts;
      flatten_and(c.body, conjuncts);
      const AttributeDef* key = mm_.key_attribute(cls);
      if (key && !conjuncts.empty()) {
        if (const auto* eq = std::get_if<BinaryExpr>(&conjuncts[0]->node)) {
          const auto* lhs = eq->op == BinOp::Eq
                                ? std::get_if<IdentExpr>(&eq->lhs->node)
                                : nullptr;
          bool is_key_eq = lhs && lhs->path.size() == 2 && lhs->path[0] == var &&
                           lhs->path[1] == key->name && !lhs->at_pre &&
                           !free_vars(eq->rhs, &mm_).count(var);
          if (is_key_eq) {
            const ExprPtr& key_expr = eq->rhs;
            // probe body is the key equation itself
            ExprPtr probe = make_expr<CollectionExpr>(CollKind::Exists, c.source,
                                                      std::optional<std::string>(var),
                                                      conjuncts[0]);
            StmtPtr hit = make_stmt<AssignStmt>(
                make_expr<IdentExpr>(std::vector<std::string>{var}, false),
                make_expr<IndexExpr>(cls, key_expr));
            StmtPtr miss = make_stmt<SeqStmt>(
                make_stmt<CreateStmt>(var, cls),
                make_stmt<AssignStmt>(
                    make_expr<IdentExpr>(std::vector<std::string>{var, key->name}, false),
                    key_expr));
            StmtPtr out = make_stmt<IfStmt>(std::move(probe), std::move(hit),
                                            std::move(miss));
            for (size_t i = 1; i < conjuncts.size(); ++i)
              out = seq_of(std::move(out), realize(conjuncts[i], inner));
            types = inner;  // the witness stays bound for later conjuncts
            return out;
          }
        }
      }
    }
    // full-witness search: create only when no witness satisfies the body
    ExprPtr probe =
        make_expr<CollectionExpr>(CollKind::Exists, c.source,
                                  std::optional<std::string>(var), c.body);
    StmtPtr establish =
        seq_of(make_stmt<CreateStmt>(var, cls), realize(c.body, inner));
    types = inner;
    return make_stmt<IfStmt>(std::move(probe), make_stmt<SkipStmt>(),
                             std::move(establish));
  }

  const Metamodel& mm_;
  std::string name_;
};

}  // namespace detail

namespace detail {

/// A constraint with scope features qualified through the scope variable
/// and every identifier resolved.
struct QualifiedConstraint {
  ExprPtr antecedent;  // may be null
  ExprPtr succedent;
  std::vector<ExprPtr> ranges;
  TypeEnv types;
};

inline QualifiedConstraint qualify_constraint(const Constraint& c, const Metamodel& mm) {
  TypeEnv types;
  if (c.scope_class) {
    mm.at(*c.scope_class);
    types[c.scope_var] = StaticType::objects(*c.scope_class);
  }
  Qualifier q(mm, c, types);
  QualifiedConstraint out;
  for (const auto& quant : c.quantifiers) {
    ExprPtr r = q.rewrite(quant.range);
    q.bind(quant.var, q.type_of(r));
    out.ranges.push_back(std::move(r));
  }
  out.antecedent = c.antecedent ? q.rewrite(c.antecedent) : nullptr;
  out.succedent = q.rewrite(c.succedent);
  out.types = q.types();
  return out;
}

}  // namespace detail

/// Compiles a constraint into its phase: a for-iteration over the scope
/// extent (plus nested quantifier loops) whose body establishes the
/// succedent, and the frame driving phase ordering.
inline Phase compile_constraint(const Constraint& c, const Metamodel& mm) {
  detail::QualifiedConstraint qc = detail::qualify_constraint(c, mm);

  TypeEnv realize_types = qc.types;
  detail::Realizer realizer(mm, c.name);
  StmtPtr body = realizer.realize(qc.succedent, realize_types);
  if (qc.antecedent)
    body = make_stmt<IfStmt>(qc.antecedent, std::move(body), make_stmt<SkipStmt>());
  for (size_t i = c.quantifiers.size(); i-- > 0;)
    body = make_stmt<ForStmt>(c.quantifiers[i].var, qc.ranges[i], std::move(body));
  if (c.scope_class)
    body = make_stmt<ForStmt>(
        c.scope_var,
        make_expr<IdentExpr>(std::vector<std::string>{*c.scope_class}, false),
        std::move(body));

  Phase phase;
  phase.constraint = c;
  phase.activity = std::move(body);
  phase.frame = frames(qc.succedent, mm, qc.types);
  if (qc.antecedent) {
    Frame fr = frame_reads(qc.antecedent, mm, qc.types);
    phase.frame.reads.insert(fr.reads.begin(), fr.reads.end());
  }
  for (const auto& r : qc.ranges) {
    Frame fr = frame_reads(r, mm, qc.types);
    phase.frame.reads.insert(fr.reads.begin(), fr.reads.end());
  }
  if (c.scope_class) phase.frame.reads.insert(*c.scope_class);
  return phase;
}

namespace detail {

inline bool extent_entry(const std::string& s) {
  return s.find('.') == std::string::npos;
}

/// Does a write entry conflict with a read entry? Feature entries are
/// normalized to their declaring class and compare by name; extent writes
/// (creation/deletion) affect reads of any related class's extent or
/// features.
inline bool frame_conflict(const std::string& w, const std::string& r,
                           const Metamodel& mm) {
  if (w == r) return true;
  bool we = extent_entry(w), re = extent_entry(r);
  if (we) {
    std::string rc = re ? r : r.substr(0, r.find('.'));
    if (!mm.has(w) || !mm.has(rc)) return false;
    return classes_related(mm, w, rc);
  }
  return false;
}

inline bool phases_conflict(const Phase& p, const Phase& q, const Metamodel& mm) {
  for (const auto& w : p.frame.writes)
    for (const auto& r : q.frame.reads)
      if (frame_conflict(w, r, mm)) return true;
  return false;
}

}  // namespace detail

/// Stable topological order: a phase that writes what another reads runs
/// first; ties keep declaration order. On a dependency cycle the remaining
/// phases keep declaration order and a warning is emitted.
inline std::vector<size_t> order_phases(const std::vector<Phase>& phases,
                                        const Metamodel& mm,
                                        std::vector<std::string>* warnings = nullptr) {
  size_t n = phases.size();
  std::vector<std::set<size_t>> preds(n);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j)
      if (i != j && detail::phases_conflict(phases[i], phases[j], mm))
        preds[j].insert(i);  // i writes what j reads: i before j
  std::vector<size_t> order;
  std::vector<bool> done(n, false);
  while (order.size() < n) {
    bool progressed = false;
    for (size_t i = 0; i < n; ++i) {
      if (done[i]) continue;
      bool ready = true;
      for (size_t p : preds[i])
        if (!done[p]) {
          ready = false;
          break;
        }
      if (ready) {
        order.push_back(i);
        done[i] = true;
        progressed = true;
        break;  // restart scan: stable lowest-index-first
      }
    }
    if (!progressed) {
      if (warnings)
        warnings->push_back("phase dependency cycle; falling back to declaration order");
      for (size_t i = 0; i < n; ++i)
        if (!done[i]) {
          order.push_back(i);
          done[i] = true;
        }
    }
  }
  return order;
}

/// Failed assumptions (by their printed text) plus conformance violations.
/// Empty result means the use case may run.
inline std::vector<std::string> check_asm(const UseCase& uc, Model& m) {
  std::vector<std::string> out;
  for (const auto& a : uc.assumptions) {
    Env env;
    env.model = &m;
    try {
      if (!evaluate_boolean(a, env)) out.push_back(print_expr(a));
    } catch (const Error& e) {
      out.push_back(print_expr(a) + " (error: " + std::string(e.what()) + ")");
    }
  }
  for (const auto& v : m.conformance_violations()) out.push_back("conformance: " + v);
  return out;
}

namespace detail {

/// All-bindings verification of one constraint on the (final) model.
inline VerifyResult verify_constraint(const Constraint& c, Model& m, const Model& pre) {
  VerifyResult res;
  res.constraint = c.name;
  Env env;
  env.model = &m;
  env.pre_model = &pre;

  std::string binding_desc;
  std::function<bool(size_t)> check = [&](size_t qi) -> bool {
    if (qi < c.quantifiers.size()) {
      const Quantifier& quant = c.quantifiers[qi];
      Value range = evaluate(quant.range, env);
      for (const Value& e : range.elements()) {
        BindGuard g(env, quant.var, e);
        std::string saved = binding_desc;
        binding_desc += " " + quant.var + "=" + e.to_string();
        bool ok = check(qi + 1);
        binding_desc = saved;
        if (!ok) return false;
      }
      return true;
    }
    if (c.antecedent && !evaluate_boolean(c.antecedent, env)) return true;
    return evaluate_boolean(c.succedent, env);
  };

  try {
    bool ok = true;
    if (c.scope_class) {
      for (const ObjectId& o : m.extent(*c.scope_class)) {
        SelfGuard sg(env, o);
        BindGuard bg(env, c.scope_var, o);
        binding_desc = c.scope_var + "=" + o.label;
        if (!check(0)) {
          ok = false;
          break;
        }
      }
    } else {
      binding_desc.clear();
      ok = check(0);
    }
    res.ok = ok;
    if (!ok) res.detail = "fails for" + (binding_desc.empty() ? std::string(" (global)")
                                                              : " " + binding_desc);
  } catch (const Error& e) {
    res.ok = false;
    res.detail = std::string("evaluation error: ") + e.what();
  }
  return res;
}

}  // namespace detail

/// Runs a use case in place: checks assumptions, compiles and orders the
/// phases, installs the pre-state snapshot for `@pre`, executes each phase,
/// and post-verifies every constraint against the final model.
inline RunReport execute_usecase(const UseCase& uc, Model& m,
                                 const RunOptions& options = {}) {
  RunReport report;
  report.usecase = uc.name;
  report.forced = options.force;

  report.asm_failures = check_asm(uc, m);
  if (!report.asm_failures.empty() && !options.force) return report;

  const Metamodel& mm = m.metamodel();
  std::vector<Phase> phases;
  for (const auto& c : uc.constraints) phases.push_back(compile_constraint(c, mm));
  std::vector<size_t> order = order_phases(phases, mm, &report.warnings);
  for (size_t i : order) report.phase_order.push_back(phases[i].constraint.name);

  Model pre = m.snapshot();
  report.executed = true;

  for (size_t i : order) {
    const Phase& phase = phases[i];
    PhaseReport pr;
    pr.name = phase.constraint.name;
    pr.iterations = phase.constraint.scope_class
                        ? static_cast<long long>(m.extent(*phase.constraint.scope_class).size())
                        : 1;
    MutationLog log;
    m.set_mutation_log(&log);
    try {
      Env env;
      env.model = &m;
      env.pre_model = &pre;
      exec_stmt(phase.activity, env);
    } catch (...) {
      m.set_mutation_log(nullptr);
      throw;
    }
    m.set_mutation_log(nullptr);
    pr.created = log.created;
    pr.link_changes = log.link_changes;
    report.phases.push_back(std::move(pr));
  }

  if (options.verify)
    for (const auto& c : uc.constraints)
      report.verification.push_back(detail::verify_constraint(c, m, pre));
  return report;
}

inline std::vector<UseCase> parse_usecases(const Metamodel& mm, std::string_view text) {
  Lexer lx(text);
  std::vector<UseCase> out;
  while (!lx.at_end()) {
    if (!lx.accept_ident("usecase")) lx.fail("expected 'usecase'");
    UseCase uc;
    uc.name = lx.expect_ident().text;
    lx.expect_sym("{");
    std::set<std::string> names;
    while (!lx.accept_sym("}")) {
      if (lx.accept_ident("assume")) {
        uc.assumptions.push_back(detail::ExprParser(lx).parse());
        lx.expect_sym(";");
        continue;
      }
      if (!lx.accept_ident("constraint")) lx.fail("expected 'assume', 'constraint' or '}'");
      Constraint c;
      Token nameTok = lx.expect_ident();
      c.name = nameTok.text;
      if (!names.insert(c.name).second)
        throw ParseError("duplicate constraint name " + c.name, nameTok.line, nameTok.col);
      lx.expect_sym(":");
      Token scopeTok = lx.next();
      if (scopeTok.kind != Token::Ident)
        throw ParseError("expected scope class or $global", scopeTok.line, scopeTok.col);
      if (scopeTok.text != "$global") {
        if (!mm.has(scopeTok.text))
          throw ParseError("unknown scope class " + scopeTok.text, scopeTok.line,
                           scopeTok.col);
        c.scope_class = scopeTok.text;
        c.scope_var = class_initials(scopeTok.text);
      }
      while (lx.accept_sym(";")) {
        Quantifier quant;
        quant.var = lx.expect_ident().text;
        if (quant.var == c.scope_var)
          throw ParseError("quantifier variable " + quant.var +
                               " collides with the scope variable",
                           scopeTok.line, scopeTok.col);
        lx.expect_sym(":");
        quant.range = detail::ExprParser(lx).parse();
        c.quantifiers.push_back(std::move(quant));
      }
      lx.expect_sym("::");
      ExprPtr body = detail::ExprParser(lx).parse();
      lx.expect_sym(";");
      if (const auto* b = std::get_if<BinaryExpr>(&body->node);
          b && b->op == BinOp::Implies) {
        c.antecedent = b->lhs;
        c.succedent = b->rhs;
      } else {
        c.succedent = body;
      }
      // surface unbound identifiers and unknown classes now
      detail::qualify_constraint(c, mm);
      uc.constraints.push_back(std::move(c));
    }
    out.push_back(std::move(uc));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Chains
// ---------------------------------------------------------------------------

/// Sequential composition of use cases through intermediate model files.
struct Chain {
  std::shared_ptr<const Metamodel> metamodel;
  std::vector<UseCase> usecases;
};

struct ChainOptions : RunOptions {
  // Directory for intermediate files; a fresh temp directory (removed on
  // success) when unset.
  std::optional<std::string> intermediate_dir;
};

struct ChainResult {
  std::vector<RunReport> reports;
  std::vector<std::string> intermediate_files;
  bool ok = false;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << content;
  if (!out) throw Error("cannot write " + path);
}

/// Runs the chain: each use case's result is written to an intermediate
/// file and re-parsed as the next use case's source model. The final model
/// lands at output_path. On failure the intermediate files are preserved
/// for inspection.
inline ChainResult execute_chain(const Chain& chain, const std::string& input_path,
                                 const std::string& output_path,
                                 const ChainOptions& options = {}) {
  if (chain.usecases.empty()) throw Error("empty use-case chain");
  ChainResult result;

  namespace fs = std::filesystem;
  fs::path dir;
  bool temp_dir = !options.intermediate_dir.has_value();
  if (temp_dir) {
    auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    dir = fs::temp_directory_path() / ("uct_chain_" + std::to_string(stamp));
    fs::create_directories(dir);
  } else {
    dir = *options.intermediate_dir;
    fs::create_directories(dir);
  }

  Model model = parse_model(chain.metamodel, read_file(input_path));
  for (size_t i = 0; i < chain.usecases.size(); ++i) {
    RunReport report = execute_usecase(chain.usecases[i], model, options);
    bool failed = !report.ok();
    result.reports.push_back(std::move(report));
    if (failed) return result;  // abort; intermediates stay for inspection
    if (i + 1 < chain.usecases.size()) {
      fs::path p = dir / ("step" + std::to_string(i + 1) + "_" +
                          chain.usecases[i].name + ".txt");
      write_file(p.string(), write_model(model));
      result.intermediate_files.push_back(p.string());
      model = parse_model(chain.metamodel, read_file(p.string()));
    }
  }
  write_file(output_path, write_model(model));
  result.ok = true;
  if (temp_dir) {
    std::error_code ec;
    fs::remove_all(dir, ec);  // best effort
    if (!ec) result.intermediate_files.clear();
  }
  return result;
}

}  // namespace uct
