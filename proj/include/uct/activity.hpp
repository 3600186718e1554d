#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "uct/expr.hpp"
#include "uct/lexer.hpp"

namespace uct {

// Structured-activity subset:
//
//   statement ::= "while" expr "do" stmt | "for" var ":" expr "do" stmt
//               | "if" expr "then" stmt "else" basic
//               | stmt ";" stmt
//               | var ":" ClassName                      (creation)
//               | location ":=" expr | "skip" | "return" expr
//               | "(" stmt ")" | call / E->isDeleted()   (expression statement)
//
// `;` sequences right-associatively. Loop and branch bodies holding a
// sequence are printed in parentheses.

struct Statement;
using StmtPtr = std::shared_ptr<const Statement>;

struct WhileStmt {
  ExprPtr cond;
  StmtPtr body;
};

/// Iterates a frozen copy of the range collection evaluated at loop entry.
struct ForStmt {
  std::string var;
  ExprPtr range;
  StmtPtr body;
};

struct IfStmt {
  ExprPtr cond;
  StmtPtr then_branch;
  StmtPtr else_branch;  // never null; one-armed conditionals use skip
};

struct SeqStmt {
  StmtPtr first;
  StmtPtr second;
};

/// `x : ClassName` — instantiate and bind x.
struct CreateStmt {
  std::string var;
  std::string class_name;
};

/// `location := value`. The target is a variable, a feature path, or a
/// key-indexed feature (`E[k].f`).
struct AssignStmt {
  ExprPtr target;
  ExprPtr value;
};

struct SkipStmt {};

struct ReturnStmt {
  ExprPtr value;
};

/// An expression executed for effect: an operation call or `E->isDeleted()`.
struct ExprStmt {
  ExprPtr expr;
};

struct Statement {
  std::variant<WhileStmt, ForStmt, IfStmt, SeqStmt, CreateStmt, AssignStmt, SkipStmt,
               ReturnStmt, ExprStmt>
      node;
};

template <class T, class... Args>
StmtPtr make_stmt(Args&&... args) {
  return std::make_shared<Statement>(Statement{T{std::forward<Args>(args)...}});
}

inline bool stmt_equal(const Statement& a, const Statement& b);

inline bool stmt_equal(const StmtPtr& a, const StmtPtr& b) {
  if (!a || !b) return !a && !b;
  return stmt_equal(*a, *b);
}

inline bool stmt_equal(const Statement& a, const Statement& b) {
  if (a.node.index() != b.node.index()) return false;
  if (const auto* x = std::get_if<WhileStmt>(&a.node)) {
    const auto& y = std::get<WhileStmt>(b.node);
    return expr_equal(x->cond, y.cond) && stmt_equal(x->body, y.body);
  }
  if (const auto* x = std::get_if<ForStmt>(&a.node)) {
    const auto& y = std::get<ForStmt>(b.node);
    return x->var == y.var && expr_equal(x->range, y.range) && stmt_equal(x->body, y.body);
  }
  if (const auto* x = std::get_if<IfStmt>(&a.node)) {
    const auto& y = std::get<IfStmt>(b.node);
    return expr_equal(x->cond, y.cond) && stmt_equal(x->then_branch, y.then_branch) &&
           stmt_equal(x->else_branch, y.else_branch);
  }
  if (const auto* x = std::get_if<SeqStmt>(&a.node)) {
    const auto& y = std::get<SeqStmt>(b.node);
    return stmt_equal(x->first, y.first) && stmt_equal(x->second, y.second);
  }
  if (const auto* x = std::get_if<CreateStmt>(&a.node)) {
    const auto& y = std::get<CreateStmt>(b.node);
    return x->var == y.var && x->class_name == y.class_name;
  }
  if (const auto* x = std::get_if<AssignStmt>(&a.node)) {
    const auto& y = std::get<AssignStmt>(b.node);
    return expr_equal(x->target, y.target) && expr_equal(x->value, y.value);
  }
  if (std::get_if<SkipStmt>(&a.node)) return true;
  if (const auto* x = std::get_if<ReturnStmt>(&a.node)) {
    const auto& y = std::get<ReturnStmt>(b.node);
    return expr_equal(x->value, y.value);
  }
  const auto& x = std::get<ExprStmt>(a.node);
  const auto& y = std::get<ExprStmt>(b.node);
  return expr_equal(x.expr, y.expr);
}

namespace detail {

class StmtParser {
 public:
  explicit StmtParser(Lexer& lx) : lx_(lx) {}

  StmtPtr parse() {
    StmtPtr s = parse_item();
    if (lx_.accept_sym(";")) {
      StmtPtr rest = parse();  // ';' is right-associative
      return make_stmt<SeqStmt>(std::move(s), std::move(rest));
    }
    return s;
  }

 private:
  StmtPtr parse_item() {
    const Token& t = lx_.peek();
    if (t.is_ident("while")) {
      lx_.next();
      ExprPtr cond = ExprParser(lx_).parse();
      expect_ident("do");
      return make_stmt<WhileStmt>(std::move(cond), parse_item());
    }
    if (t.is_ident("for")) {
      lx_.next();
      ExprPtr range = ExprParser(lx_).parse();
      const auto* b = std::get_if<BinaryExpr>(&range->node);
      if (!b || b->op != BinOp::In)
        throw ParseError("for-range must have the form var : collection", t.line, t.col);
      const auto* v = std::get_if<IdentExpr>(&b->lhs->node);
      if (!v || v->path.size() != 1 || v->at_pre)
        throw ParseError("for-range variable must be a plain identifier", t.line, t.col);
      expect_ident("do");
      return make_stmt<ForStmt>(v->path[0], b->rhs, parse_item());
    }
    if (t.is_ident("if")) {
      lx_.next();
      ExprPtr cond = ExprParser(lx_).parse();
      expect_ident("then");
      StmtPtr then_b = parse_item();
      expect_ident("else");
      StmtPtr else_b = parse_basic();
      return make_stmt<IfStmt>(std::move(cond), std::move(then_b), std::move(else_b));
    }
    if (t.is_ident("skip")) {
      lx_.next();
      return make_stmt<SkipStmt>();
    }
    if (t.is_ident("return")) {
      lx_.next();
      return make_stmt<ReturnStmt>(ExprParser(lx_).parse());
    }
    if (t.is_sym("(")) return parse_basic();
    // creation: IDENT ":" IDENT followed by a statement boundary
    if (t.kind == Token::Ident && lx_.peek(1).is_sym(":") &&
        lx_.peek(2).kind == Token::Ident && boundary(lx_.peek(3))) {
      std::string var = lx_.next().text;
      lx_.next();
      std::string cls = lx_.next().text;
      return make_stmt<CreateStmt>(std::move(var), std::move(cls));
    }
    return parse_expr_led();
  }

  StmtPtr parse_basic() {
    const Token& t = lx_.peek();
    if (t.is_sym("(")) {
      lx_.next();
      StmtPtr s = parse();
      lx_.expect_sym(")");
      return s;
    }
    if (t.is_ident("skip")) {
      lx_.next();
      return make_stmt<SkipStmt>();
    }
    if (t.is_ident("return")) {
      lx_.next();
      return make_stmt<ReturnStmt>(ExprParser(lx_).parse());
    }
    return parse_expr_led();
  }

  // Assignment target, operation call, or isDeleted-expression statement.
  StmtPtr parse_expr_led() {
    const Token& t = lx_.peek();
    ExprPtr e = ExprParser(lx_).parse();
    if (lx_.accept_sym(":=")) {
      if (!assignable(*e))
        throw ParseError("left side of := must be a variable or feature path", t.line,
                         t.col);
      return make_stmt<AssignStmt>(std::move(e), ExprParser(lx_).parse());
    }
    if (std::get_if<CallExpr>(&e->node)) return make_stmt<ExprStmt>(std::move(e));
    if (const auto* c = std::get_if<CollectionExpr>(&e->node))
      if (c->kind == CollKind::IsDeleted) return make_stmt<ExprStmt>(std::move(e));
    throw ParseError("expression is not a statement", t.line, t.col);
  }

  static bool assignable(const Expr& e) {
    if (std::get_if<IdentExpr>(&e.node)) return true;
    if (const auto* n = std::get_if<NavExpr>(&e.node)) {
      const Expr* s = n->source.get();
      while (const auto* inner = std::get_if<NavExpr>(&s->node)) s = inner->source.get();
      return std::get_if<IndexExpr>(&s->node) || std::get_if<IdentExpr>(&s->node);
    }
    return false;
  }

  static bool boundary(const Token& t) {
    if (t.kind == Token::End) return true;
    if (t.kind == Token::Ident) return t.text == "else";
    return t.is_sym(";") || t.is_sym(")");
  }

  void expect_ident(std::string_view kw) {
    if (!lx_.accept_ident(kw)) lx_.fail("expected '" + std::string(kw) + "'");
  }

  Lexer& lx_;
};

inline bool is_seq(const Statement& s) { return std::get_if<SeqStmt>(&s.node) != nullptr; }

inline bool is_basic(const Statement& s) {
  return std::get_if<AssignStmt>(&s.node) || std::get_if<SkipStmt>(&s.node) ||
         std::get_if<ReturnStmt>(&s.node) || std::get_if<ExprStmt>(&s.node);
}

inline std::string print_stmt_impl(const Statement& s);

inline std::string print_body(const Statement& s) {
  // loop/then bodies are single items; parenthesize sequences
  if (is_seq(s)) return "( " + print_stmt_impl(s) + " )";
  return print_stmt_impl(s);
}

inline std::string print_else(const Statement& s) {
  if (is_basic(s)) return print_stmt_impl(s);
  return "( " + print_stmt_impl(s) + " )";
}

inline std::string print_stmt_impl(const Statement& s) {
  if (const auto* w = std::get_if<WhileStmt>(&s.node))
    return "while " + print_expr(w->cond) + " do " + print_body(*w->body);
  if (const auto* f = std::get_if<ForStmt>(&s.node))
    return "for " + f->var + " : " + print_expr(f->range) + " do " + print_body(*f->body);
  if (const auto* i = std::get_if<IfStmt>(&s.node))
    return "if " + print_expr(i->cond) + " then " + print_body(*i->then_branch) + " else " +
           print_else(*i->else_branch);
  if (const auto* q = std::get_if<SeqStmt>(&s.node)) {
    // ';' parses right-associatively; keep a left-nested first element intact
    std::string first = is_seq(*q->first) ? "( " + print_stmt_impl(*q->first) + " )"
                                          : print_stmt_impl(*q->first);
    return first + " ; " + print_stmt_impl(*q->second);
  }
  if (const auto* c = std::get_if<CreateStmt>(&s.node))
    return c->var + " : " + c->class_name;
  if (const auto* a = std::get_if<AssignStmt>(&s.node))
    return print_expr(a->target) + " := " + print_expr(a->value);
  if (std::get_if<SkipStmt>(&s.node)) return "skip";
  if (const auto* r = std::get_if<ReturnStmt>(&s.node))
    return "return " + print_expr(r->value);
  return print_expr(std::get<ExprStmt>(s.node).expr);
}

}  // namespace detail

/// Parses one statement (possibly a `;` sequence); consumes the whole text.
inline StmtPtr parse_stmt(std::string_view text) {
  Lexer lx(text);
  detail::StmtParser p(lx);
  StmtPtr s = p.parse();
  if (!lx.at_end()) lx.fail("unexpected trailing input");
  return s;
}

/// parse_stmt(print_stmt(s)) == s.
inline std::string print_stmt(const Statement& s) { return detail::print_stmt_impl(s); }
inline std::string print_stmt(const StmtPtr& s) { return detail::print_stmt_impl(*s); }

}  // namespace uct
