#pragma once

// Random well-formed expression and statement ASTs for round-trip
// properties. Values stay within what the grammar can spell literally
// (no negative numbers, reals with exact dyadic fractions).

#include <random>
#include <string>
#include <vector>

#include "uct/activity.hpp"
#include "uct/expr.hpp"

namespace uct_test {

class AstGen {
 public:
  explicit AstGen(unsigned seed) : rng_(seed) {}

  uct::ExprPtr expr(int depth = 3) { return gen_expr(depth); }
  uct::StmtPtr stmt(int depth = 3) { return gen_stmt(depth); }

 private:
  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }

  std::string ident() {
    static const char* names[] = {"f", "fg", "rf", "fd", "name", "children",
                                  "figures", "accessor", "Figure", "RealFigure"};
    return names[pick(10)];
  }

  uct::ExprPtr literal() {
    switch (pick(4)) {
      case 0: return uct::make_expr<uct::LitExpr>(uct::Value(static_cast<long long>(pick(100))));
      case 1: {
        static const double reals[] = {0.5, 1.25, 3.75, 10.5};
        return uct::make_expr<uct::LitExpr>(uct::Value(reals[pick(4)]));
      }
      case 2: return uct::make_expr<uct::LitExpr>(uct::Value(pick(2) == 0));
      default: {
        static const char* strs[] = {"f1", "f2", "a b", "x\"y"};
        return uct::make_expr<uct::LitExpr>(uct::Value(std::string(strs[pick(4)])));
      }
    }
  }

  uct::ExprPtr atom() {
    switch (pick(3)) {
      case 0: return literal();
      case 1: {
        uct::IdentExpr id;
        int segs = 1 + pick(3);
        for (int i = 0; i < segs; ++i) id.path.push_back(ident());
        id.at_pre = pick(4) == 0;
        return uct::make_expr<uct::IdentExpr>(std::move(id));
      }
      default: {
        uct::SetLitExpr s;
        int n = pick(3);
        for (int i = 0; i < n; ++i) s.elems.push_back(literal());
        return uct::make_expr<uct::SetLitExpr>(std::move(s));
      }
    }
  }

  uct::ExprPtr gen_expr(int depth) {
    if (depth <= 0) return atom();
    switch (pick(8)) {
      case 0:
      case 1: {
        static const uct::BinOp ops[] = {
            uct::BinOp::Implies, uct::BinOp::Or,       uct::BinOp::And,
            uct::BinOp::Eq,      uct::BinOp::Neq,      uct::BinOp::Gt,
            uct::BinOp::Lt,      uct::BinOp::SubsetEq, uct::BinOp::Le,
            uct::BinOp::Ge,      uct::BinOp::In,       uct::BinOp::NotIn,
            uct::BinOp::Add,     uct::BinOp::Sub,      uct::BinOp::Mul,
            uct::BinOp::Div,     uct::BinOp::Union,    uct::BinOp::Intersect,
            uct::BinOp::Concat};
        return uct::make_expr<uct::BinaryExpr>(ops[pick(19)], gen_expr(depth - 1),
                                               gen_expr(depth - 1));
      }
      case 2: {
        static const uct::CollKind noargs[] = {uct::CollKind::Any, uct::CollKind::Size,
                                               uct::CollKind::IsDeleted};
        return uct::make_expr<uct::CollectionExpr>(noargs[pick(3)], gen_expr(depth - 1),
                                                   std::nullopt, nullptr);
      }
      case 3: {
        static const uct::CollKind quants[] = {uct::CollKind::Exists,
                                               uct::CollKind::Exists1,
                                               uct::CollKind::ForAll};
        std::optional<std::string> var;
        if (pick(2) == 0) var = ident();
        return uct::make_expr<uct::CollectionExpr>(quants[pick(3)], gen_expr(depth - 1),
                                                   var, gen_expr(depth - 1));
      }
      case 4: {
        uct::CollKind k = pick(2) == 0 ? uct::CollKind::Select : uct::CollKind::Reject;
        return uct::make_expr<uct::CollectionExpr>(k, gen_expr(depth - 1), std::nullopt,
                                                   gen_expr(depth - 1));
      }
      case 5: {
        uct::CallExpr c{ident(), {}};
        int n = pick(3);
        for (int i = 0; i < n; ++i) c.args.push_back(gen_expr(depth - 1));
        return uct::make_expr<uct::CallExpr>(std::move(c));
      }
      case 6:
        return uct::make_expr<uct::IndexExpr>(ident(), gen_expr(depth - 1));
      default: {
        if (pick(2) == 0)
          return uct::make_expr<uct::NavExpr>(
              uct::make_expr<uct::IndexExpr>(ident(), gen_expr(depth - 1)), ident());
        uct::SeqLitExpr s;
        int n = pick(3);
        for (int i = 0; i < n; ++i) s.elems.push_back(gen_expr(depth - 1));
        return uct::make_expr<uct::SeqLitExpr>(std::move(s));
      }
    }
  }

  uct::ExprPtr assign_target() {
    if (pick(2) == 0) {
      uct::IdentExpr id;
      int segs = 1 + pick(3);
      for (int i = 0; i < segs; ++i) id.path.push_back(ident());
      id.at_pre = pick(6) == 0;
      return uct::make_expr<uct::IdentExpr>(std::move(id));
    }
    return uct::make_expr<uct::NavExpr>(
        uct::make_expr<uct::IndexExpr>(ident(), gen_expr(1)), ident());
  }

  uct::StmtPtr gen_stmt(int depth) {
    if (depth <= 0) {
      switch (pick(3)) {
        case 0: return uct::make_stmt<uct::SkipStmt>();
        case 1: return uct::make_stmt<uct::AssignStmt>(assign_target(), gen_expr(1));
        default: return uct::make_stmt<uct::CreateStmt>(ident(), ident());
      }
    }
    switch (pick(8)) {
      case 0: return uct::make_stmt<uct::WhileStmt>(gen_expr(depth - 1), gen_stmt(depth - 1));
      case 1:
        return uct::make_stmt<uct::ForStmt>(ident(), gen_expr(depth - 1),
                                            gen_stmt(depth - 1));
      case 2:
        return uct::make_stmt<uct::IfStmt>(gen_expr(depth - 1), gen_stmt(depth - 1),
                                           gen_stmt(depth - 1));
      case 3:
        return uct::make_stmt<uct::SeqStmt>(gen_stmt(depth - 1), gen_stmt(depth - 1));
      case 4: return uct::make_stmt<uct::CreateStmt>(ident(), ident());
      case 5: return uct::make_stmt<uct::AssignStmt>(assign_target(), gen_expr(depth - 1));
      case 6: return uct::make_stmt<uct::ReturnStmt>(gen_expr(depth - 1));
      default: {
        uct::CallExpr c{ident(), {}};
        int n = pick(3);
        for (int i = 0; i < n; ++i) c.args.push_back(gen_expr(depth - 1));
        return uct::make_stmt<uct::ExprStmt>(uct::make_expr<uct::CallExpr>(std::move(c)));
      }
    }
  }

  std::mt19937 rng_;
};

}  // namespace uct_test
