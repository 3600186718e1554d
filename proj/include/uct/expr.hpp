#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "uct/lexer.hpp"
#include "uct/value.hpp"

namespace uct {

// Expression language: classical set theory operators plus an OCL-style
// collection syntax. Collections are sets and sequences only.
//
//   logical:    =>  or  &            (implies / and accepted as synonyms)
//   equality:   =  /=  >  <  <=  >=  <:  :  /:
//   factor:     +  -  *  /  \/  /\  ^
//   postfix:    e->any()  e->size()  e->isDeleted()
//               e->exists(x | b)  e->exists1(x | b)  e->forAll(x | b)
//               e->exists(b)  e->exists1(b)  e->forAll(b)
//               e->select(b)  e->reject(b)
//   basic:      {a, b}   Sequence{a, b}   f(args)   E[k]   a.b.c   literals
//
// `E@pre` (after the first path segment) reads the pre-state model.

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

enum class BinOp {
  Implies, Or, And,
  Eq, Neq, Gt, Lt, SubsetEq, Le, Ge, In, NotIn,
  Add, Sub, Mul, Div, Union, Intersect, Concat,
};

enum class CollKind { Any, Size, IsDeleted, Exists, Exists1, ForAll, Select, Reject };

struct BinaryExpr {
  BinOp op;
  ExprPtr lhs, rhs;
};

/// `source->kind(...)`. `var` is only allowed on exists/exists1/forAll;
/// any/size/isDeleted carry no body.
struct CollectionExpr {
  CollKind kind;
  ExprPtr source;
  std::optional<std::string> var;
  ExprPtr body;  // null for any/size/isDeleted
};

struct SetLitExpr {
  std::vector<ExprPtr> elems;
};

struct SeqLitExpr {
  std::vector<ExprPtr> elems;
};

struct CallExpr {
  std::string name;
  std::vector<ExprPtr> args;
};

/// `E[k]`: the instance (or set of instances) of E identified by key k.
struct IndexExpr {
  std::string name;
  ExprPtr arg;
};

/// Dotted navigation path rooted at an identifier. `at_pre` marks `@pre`
/// on the root segment.
struct IdentExpr {
  std::vector<std::string> path;
  bool at_pre = false;
};

/// Navigation applied to a non-identifier source, e.g. `E[k].children`.
struct NavExpr {
  ExprPtr source;
  std::string member;
};

struct LitExpr {
  Value value;
};

struct Expr {
  std::variant<BinaryExpr, CollectionExpr, SetLitExpr, SeqLitExpr, CallExpr, IndexExpr,
               IdentExpr, NavExpr, LitExpr>
      node;
};

template <class T, class... Args>
ExprPtr make_expr(Args&&... args) {
  return std::make_shared<Expr>(Expr{T{std::forward<Args>(args)...}});
}

inline bool expr_equal(const Expr& a, const Expr& b);

inline bool expr_equal(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return !a && !b;
  return expr_equal(*a, *b);
}

inline bool expr_equal(const Expr& a, const Expr& b) {
  if (a.node.index() != b.node.index()) return false;
  if (const auto* x = std::get_if<BinaryExpr>(&a.node)) {
    const auto& y = std::get<BinaryExpr>(b.node);
    return x->op == y.op && expr_equal(x->lhs, y.lhs) && expr_equal(x->rhs, y.rhs);
  }
  if (const auto* x = std::get_if<CollectionExpr>(&a.node)) {
    const auto& y = std::get<CollectionExpr>(b.node);
    return x->kind == y.kind && x->var == y.var && expr_equal(x->source, y.source) &&
           expr_equal(x->body, y.body);
  }
  if (const auto* x = std::get_if<SetLitExpr>(&a.node)) {
    const auto& y = std::get<SetLitExpr>(b.node);
    if (x->elems.size() != y.elems.size()) return false;
    for (size_t i = 0; i < x->elems.size(); ++i)
      if (!expr_equal(x->elems[i], y.elems[i])) return false;
    return true;
  }
  if (const auto* x = std::get_if<SeqLitExpr>(&a.node)) {
    const auto& y = std::get<SeqLitExpr>(b.node);
    if (x->elems.size() != y.elems.size()) return false;
    for (size_t i = 0; i < x->elems.size(); ++i)
      if (!expr_equal(x->elems[i], y.elems[i])) return false;
    return true;
  }
  if (const auto* x = std::get_if<CallExpr>(&a.node)) {
    const auto& y = std::get<CallExpr>(b.node);
    if (x->name != y.name || x->args.size() != y.args.size()) return false;
    for (size_t i = 0; i < x->args.size(); ++i)
      if (!expr_equal(x->args[i], y.args[i])) return false;
    return true;
  }
  if (const auto* x = std::get_if<IndexExpr>(&a.node)) {
    const auto& y = std::get<IndexExpr>(b.node);
    return x->name == y.name && expr_equal(x->arg, y.arg);
  }
  if (const auto* x = std::get_if<IdentExpr>(&a.node)) {
    const auto& y = std::get<IdentExpr>(b.node);
    return x->path == y.path && x->at_pre == y.at_pre;
  }
  if (const auto* x = std::get_if<NavExpr>(&a.node)) {
    const auto& y = std::get<NavExpr>(b.node);
    return x->member == y.member && expr_equal(x->source, y.source);
  }
  const auto& x = std::get<LitExpr>(a.node);
  const auto& y = std::get<LitExpr>(b.node);
  // literal equality is structural: 1 and 1.0 are different literals
  return x.value.raw().index() == y.value.raw().index() && x.value == y.value;
}

namespace detail {

struct OpInfo {
  BinOp op;
  int prec;
};

inline std::optional<OpInfo> binop_for(const Token& t) {
  if (t.kind == Token::Ident) {
    if (t.text == "implies") return OpInfo{BinOp::Implies, 1};
    if (t.text == "or") return OpInfo{BinOp::Or, 2};
    if (t.text == "and") return OpInfo{BinOp::And, 3};
    return std::nullopt;
  }
  if (t.kind != Token::Sym) return std::nullopt;
  const std::string& s = t.text;
  if (s == "=>") return OpInfo{BinOp::Implies, 1};
  if (s == "or") return OpInfo{BinOp::Or, 2};
  if (s == "&") return OpInfo{BinOp::And, 3};
  if (s == "=") return OpInfo{BinOp::Eq, 4};
  if (s == "/=") return OpInfo{BinOp::Neq, 4};
  if (s == ">") return OpInfo{BinOp::Gt, 4};
  if (s == "<") return OpInfo{BinOp::Lt, 4};
  if (s == "<:") return OpInfo{BinOp::SubsetEq, 4};
  if (s == "<=") return OpInfo{BinOp::Le, 4};
  if (s == ">=") return OpInfo{BinOp::Ge, 4};
  if (s == ":") return OpInfo{BinOp::In, 4};
  if (s == "/:") return OpInfo{BinOp::NotIn, 4};
  if (s == "+") return OpInfo{BinOp::Add, 5};
  if (s == "-") return OpInfo{BinOp::Sub, 5};
  if (s == "\\/") return OpInfo{BinOp::Union, 5};
  if (s == "^") return OpInfo{BinOp::Concat, 5};
  if (s == "*") return OpInfo{BinOp::Mul, 6};
  if (s == "/") return OpInfo{BinOp::Div, 6};
  if (s == "/\\") return OpInfo{BinOp::Intersect, 6};
  return std::nullopt;
}

inline int binop_prec(BinOp op) {
  switch (op) {
    case BinOp::Implies: return 1;
    case BinOp::Or: return 2;
    case BinOp::And: return 3;
    case BinOp::Eq:
    case BinOp::Neq:
    case BinOp::Gt:
    case BinOp::Lt:
    case BinOp::SubsetEq:
    case BinOp::Le:
    case BinOp::Ge:
    case BinOp::In:
    case BinOp::NotIn: return 4;
    case BinOp::Add:
    case BinOp::Sub:
    case BinOp::Union:
    case BinOp::Concat: return 5;
    case BinOp::Mul:
    case BinOp::Div:
    case BinOp::Intersect: return 6;
  }
  return 0;
}

inline const char* binop_text(BinOp op) {
  switch (op) {
    case BinOp::Implies: return "=>";
    case BinOp::Or: return "or";
    case BinOp::And: return "&";
    case BinOp::Eq: return "=";
    case BinOp::Neq: return "/=";
    case BinOp::Gt: return ">";
    case BinOp::Lt: return "<";
    case BinOp::SubsetEq: return "<:";
    case BinOp::Le: return "<=";
    case BinOp::Ge: return ">=";
    case BinOp::In: return ":";
    case BinOp::NotIn: return "/:";
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Div: return "/";
    case BinOp::Union: return "\\/";
    case BinOp::Intersect: return "/\\";
    case BinOp::Concat: return "^";
  }
  return "?";
}

inline const char* collkind_text(CollKind k) {
  switch (k) {
    case CollKind::Any: return "any";
    case CollKind::Size: return "size";
    case CollKind::IsDeleted: return "isDeleted";
    case CollKind::Exists: return "exists";
    case CollKind::Exists1: return "exists1";
    case CollKind::ForAll: return "forAll";
    case CollKind::Select: return "select";
    case CollKind::Reject: return "reject";
  }
  return "?";
}

/// Recursive-descent expression parser over a shared lexer.
/// Precedence: => (lowest, right-assoc), or, &, equality (non-associative),
/// + - \/ ^ (left), * / /\ (left), postfix/navigation (tightest).
class ExprParser {
 public:
  explicit ExprParser(Lexer& lx) : lx_(lx) {}

  ExprPtr parse() { return parse_implies(); }

 private:
  ExprPtr parse_implies() {
    ExprPtr lhs = parse_or();
    auto op = binop_for(lx_.peek());
    if (op && op->op == BinOp::Implies) {
      lx_.next();
      ExprPtr rhs = parse_implies();  // right-associative
      return make_expr<BinaryExpr>(BinOp::Implies, lhs, rhs);
    }
    return lhs;
  }

  ExprPtr parse_or() {
    ExprPtr lhs = parse_and();
    for (;;) {
      auto op = binop_for(lx_.peek());
      if (!op || op->op != BinOp::Or) return lhs;
      lx_.next();
      lhs = make_expr<BinaryExpr>(BinOp::Or, lhs, parse_and());
    }
  }

  ExprPtr parse_and() {
    ExprPtr lhs = parse_equality();
    for (;;) {
      auto op = binop_for(lx_.peek());
      if (!op || op->op != BinOp::And) return lhs;
      lx_.next();
      lhs = make_expr<BinaryExpr>(BinOp::And, lhs, parse_equality());
    }
  }

  ExprPtr parse_equality() {
    ExprPtr lhs = parse_additive();
    auto op = binop_for(lx_.peek());
    if (op && op->prec == 4) {
      lx_.next();
      ExprPtr rhs = parse_additive();
      auto again = binop_for(lx_.peek());
      if (again && again->prec == 4)
        lx_.fail("comparison operators do not chain; parenthesize");
      return make_expr<BinaryExpr>(op->op, lhs, rhs);
    }
    return lhs;
  }

  ExprPtr parse_additive() {
    ExprPtr lhs = parse_multiplicative();
    for (;;) {
      auto op = binop_for(lx_.peek());
      if (!op || op->prec != 5) return lhs;
      lx_.next();
      lhs = make_expr<BinaryExpr>(op->op, lhs, parse_multiplicative());
    }
  }

  ExprPtr parse_multiplicative() {
    ExprPtr lhs = parse_postfix();
    for (;;) {
      auto op = binop_for(lx_.peek());
      if (!op || op->prec != 6) return lhs;
      lx_.next();
      lhs = make_expr<BinaryExpr>(op->op, lhs, parse_postfix());
    }
  }

  ExprPtr parse_postfix() {
    ExprPtr e = parse_primary();
    for (;;) {
      if (lx_.peek().is_sym("->")) {
        lx_.next();
        e = parse_collection_op(e);
      } else if (lx_.peek().is_sym(".")) {
        lx_.next();
        Token m = lx_.expect_ident();
        e = fold_nav(e, m.text);
      } else {
        return e;
      }
    }
  }

  // `a.b` on a plain identifier extends its path; on anything else it
  // becomes an explicit navigation node.
  static ExprPtr fold_nav(const ExprPtr& e, const std::string& member) {
    if (const auto* id = std::get_if<IdentExpr>(&e->node)) {
      IdentExpr ext = *id;
      ext.path.push_back(member);
      return make_expr<IdentExpr>(std::move(ext));
    }
    return make_expr<NavExpr>(e, member);
  }

  ExprPtr parse_collection_op(ExprPtr source) {
    Token name = lx_.expect_ident();
    CollKind kind;
    if (name.text == "any") kind = CollKind::Any;
    else if (name.text == "size") kind = CollKind::Size;
    else if (name.text == "isDeleted") kind = CollKind::IsDeleted;
    else if (name.text == "exists") kind = CollKind::Exists;
    else if (name.text == "exists1") kind = CollKind::Exists1;
    else if (name.text == "forAll") kind = CollKind::ForAll;
    else if (name.text == "select") kind = CollKind::Select;
    else if (name.text == "reject") kind = CollKind::Reject;
    else throw ParseError("unknown -> operator " + name.text, name.line, name.col);
    lx_.expect_sym("(");
    if (kind == CollKind::Any || kind == CollKind::Size || kind == CollKind::IsDeleted) {
      lx_.expect_sym(")");
      return make_expr<CollectionExpr>(kind, std::move(source), std::nullopt, nullptr);
    }
    std::optional<std::string> var;
    bool quantifier =
        kind == CollKind::Exists || kind == CollKind::Exists1 || kind == CollKind::ForAll;
    if (quantifier && lx_.peek().kind == Token::Ident && lx_.peek(1).is_sym("|")) {
      var = lx_.next().text;
      lx_.next();  // '|'
    }
    ExprPtr body = parse_implies();
    lx_.expect_sym(")");
    return make_expr<CollectionExpr>(kind, std::move(source), std::move(var),
                                     std::move(body));
  }

  ExprPtr parse_primary() {
    const Token& t = lx_.peek();
    if (t.is_sym("(")) {
      lx_.next();
      ExprPtr e = parse_implies();
      lx_.expect_sym(")");
      return e;
    }
    if (t.is_sym("{")) {
      lx_.next();
      SetLitExpr s;
      if (!lx_.accept_sym("}")) {
        do s.elems.push_back(parse_additive());
        while (lx_.accept_sym(","));
        lx_.expect_sym("}");
      }
      return make_expr<SetLitExpr>(std::move(s));
    }
    if (t.kind == Token::Int) {
      lx_.next();
      return make_expr<LitExpr>(Value(t.int_val));
    }
    if (t.kind == Token::Real) {
      lx_.next();
      return make_expr<LitExpr>(Value(t.real_val));
    }
    if (t.kind == Token::Str) {
      lx_.next();
      return make_expr<LitExpr>(Value(t.text));
    }
    if (t.kind == Token::Ident) {
      if (t.text == "true" || t.text == "false") {
        lx_.next();
        return make_expr<LitExpr>(Value(t.text == "true"));
      }
      if (t.text == "Sequence" && lx_.peek(1).is_sym("{")) {
        lx_.next();
        lx_.next();
        SeqLitExpr s;
        if (!lx_.accept_sym("}")) {
          do s.elems.push_back(parse_additive());
          while (lx_.accept_sym(","));
          lx_.expect_sym("}");
        }
        return make_expr<SeqLitExpr>(std::move(s));
      }
      std::string head = lx_.next().text;
      if (lx_.peek().is_sym("(")) {
        lx_.next();
        CallExpr c{head, {}};
        if (!lx_.accept_sym(")")) {
          do c.args.push_back(parse_additive());
          while (lx_.accept_sym(","));
          lx_.expect_sym(")");
        }
        return make_expr<CallExpr>(std::move(c));
      }
      if (lx_.peek().is_sym("[")) {
        lx_.next();
        ExprPtr arg = parse_additive();
        lx_.expect_sym("]");
        return make_expr<IndexExpr>(head, std::move(arg));
      }
      IdentExpr id;
      id.path.push_back(head);
      if (lx_.accept_sym("@pre")) id.at_pre = true;
      while (lx_.peek().is_sym(".") && lx_.peek(1).kind == Token::Ident) {
        lx_.next();
        id.path.push_back(lx_.next().text);
      }
      return make_expr<IdentExpr>(std::move(id));
    }
    lx_.fail("expected expression");
  }

  Lexer& lx_;
};

}  // namespace detail

/// Parses one expression; the whole text must be consumed.
inline ExprPtr parse_expr(std::string_view text) {
  Lexer lx(text);
  detail::ExprParser p(lx);
  ExprPtr e = p.parse();
  if (!lx.at_end()) lx.fail("unexpected trailing input");
  return e;
}

namespace detail {

// Minimal-parentheses printer. `ctx` is the precedence required from the
// child; associativity gaps are +1 on the non-chaining side.
inline std::string print_expr_prec(const Expr& e, int ctx);

inline std::string print_expr_prec(const ExprPtr& e, int ctx) {
  return print_expr_prec(*e, ctx);
}

inline std::string print_expr_prec(const Expr& e, int ctx) {
  if (const auto* b = std::get_if<BinaryExpr>(&e.node)) {
    int p = binop_prec(b->op);
    int lctx = p, rctx = p;
    if (b->op == BinOp::Implies) lctx = p + 1;       // right-associative
    else if (p == 4) { lctx = p + 1; rctx = p + 1; }  // non-associative
    else rctx = p + 1;                                // left-associative
    std::string s = print_expr_prec(b->lhs, lctx) + " " + binop_text(b->op) + " " +
                    print_expr_prec(b->rhs, rctx);
    if (p < ctx) return "(" + s + ")";
    return s;
  }
  if (const auto* c = std::get_if<CollectionExpr>(&e.node)) {
    std::string s = print_expr_prec(c->source, 7) + "->" + collkind_text(c->kind) + "(";
    if (c->var) s += *c->var + " | ";
    if (c->body) s += print_expr_prec(c->body, 0);
    s += ")";
    return s;
  }
  if (const auto* s = std::get_if<SetLitExpr>(&e.node)) {
    std::string out = "{";
    for (size_t i = 0; i < s->elems.size(); ++i)
      out += (i ? ", " : "") + print_expr_prec(s->elems[i], 5);
    return out + "}";
  }
  if (const auto* s = std::get_if<SeqLitExpr>(&e.node)) {
    std::string out = "Sequence{";
    for (size_t i = 0; i < s->elems.size(); ++i)
      out += (i ? ", " : "") + print_expr_prec(s->elems[i], 5);
    return out + "}";
  }
  if (const auto* c = std::get_if<CallExpr>(&e.node)) {
    std::string out = c->name + "(";
    for (size_t i = 0; i < c->args.size(); ++i)
      out += (i ? ", " : "") + print_expr_prec(c->args[i], 5);
    return out + ")";
  }
  if (const auto* ix = std::get_if<IndexExpr>(&e.node)) {
    return ix->name + "[" + print_expr_prec(ix->arg, 5) + "]";
  }
  if (const auto* id = std::get_if<IdentExpr>(&e.node)) {
    std::string out = id->path[0];
    if (id->at_pre) out += "@pre";
    for (size_t i = 1; i < id->path.size(); ++i) out += "." + id->path[i];
    return out;
  }
  if (const auto* n = std::get_if<NavExpr>(&e.node)) {
    return print_expr_prec(n->source, 7) + "." + n->member;
  }
  const Value& v = std::get<LitExpr>(e.node).value;
  std::string s = v.to_string();
  // a real literal must keep its decimal point to reparse as a real
  if (v.is_real() && s.find('.') == std::string::npos) s += ".0";
  return s;
}

}  // namespace detail

/// Renders with minimal parentheses; parse_expr(print_expr(e)) == e.
inline std::string print_expr(const Expr& e) { return detail::print_expr_prec(e, 0); }
inline std::string print_expr(const ExprPtr& e) { return detail::print_expr_prec(*e, 0); }

}  // namespace uct
