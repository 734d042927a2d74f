#include "linsys/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace linsys {

namespace {

constexpr double kPivotEps = 1e-11;
constexpr double kCostEps = 1e-9;

// Dense tableau: rows_ constraint rows plus one objective row, columns
// n_total structural/slack/artificial columns plus the rhs. The objective
// row holds reduced costs; its rhs cell holds minus the objective value.
struct Tableau {
  Matrix t;
  std::vector<Index> basis;
  Index m, n;  // constraint rows, priceable columns (excl. rhs)

  double& obj(Index j) { return t(m, j); }
  double& rhs(Index i) { return t(i, n); }

  void pivot(Index r, Index j) {
    t.row(r) /= t(r, j);
    for (Index i = 0; i <= m; ++i) {
      if (i == r) continue;
      const double f = t(i, j);
      if (f != 0.0) t.row(i) -= f * t.row(r);
    }
    basis[r] = j;
  }

  // Subtract basic-variable costs so reduced costs of basic columns are 0.
  void price_out(const Vector& cost) {
    for (Index i = 0; i < m; ++i) {
      const double cb = cost(basis[i]);
      if (cb != 0.0) t.row(m) -= cb * t.row(i);
    }
  }
};

}  // namespace

LpSolution solve_lp(const LpProblem& p, const LpOptions& opts) {
  const Index m = p.a.rows();
  const Index n_orig = p.a.cols();
  require(p.b.size() == m, "solve_lp: b size mismatch");
  require(static_cast<Index>(p.sense.size()) == m, "solve_lp: sense size mismatch");
  require(p.c.size() == n_orig, "solve_lp: c size mismatch");
  require(p.free_var.empty() || static_cast<Index>(p.free_var.size()) == n_orig,
          "solve_lp: free_var size mismatch");
  require_finite(p.a, "solve_lp: a");
  require_finite(p.b, "solve_lp: b");
  require_finite(p.c, "solve_lp: c");

  // Split free variables x = u - v so every column is non-negative.
  std::vector<Index> neg_part(n_orig, -1);
  Index n_split = n_orig;
  for (Index j = 0; j < n_orig; ++j)
    if (!p.free_var.empty() && p.free_var[j]) neg_part[j] = n_split++;

  // Normalize rows to b >= 0, then turn GE rows with zero rhs into LE so
  // they admit a slack basis without artificials.
  Matrix a(m, n_split);
  a.leftCols(n_orig) = p.a;
  for (Index j = 0; j < n_orig; ++j)
    if (neg_part[j] >= 0) a.col(neg_part[j]) = -p.a.col(j);
  Vector b = p.b;
  std::vector<RowSense> sense = p.sense;
  for (Index i = 0; i < m; ++i) {
    if (b(i) < 0.0) {
      a.row(i) = -a.row(i);
      b(i) = -b(i);
      if (sense[i] == RowSense::LE) sense[i] = RowSense::GE;
      else if (sense[i] == RowSense::GE) sense[i] = RowSense::LE;
    }
    if (sense[i] == RowSense::GE && b(i) == 0.0) {
      a.row(i) = -a.row(i);
      sense[i] = RowSense::LE;
    }
  }

  Index n_slack = 0, n_art = 0;
  for (Index i = 0; i < m; ++i) {
    if (sense[i] != RowSense::EQ) ++n_slack;
    if (sense[i] != RowSense::LE) ++n_art;
  }

  Tableau tb;
  tb.m = m;
  tb.n = n_split + n_slack + n_art;
  tb.t = Matrix::Zero(m + 1, tb.n + 1);
  tb.t.block(0, 0, m, n_split) = a;
  tb.basis.assign(m, -1);

  const Index slack0 = n_split;
  const Index art0 = n_split + n_slack;
  Index si = 0, ai = 0;
  for (Index i = 0; i < m; ++i) {
    tb.rhs(i) = b(i);
    switch (sense[i]) {
      case RowSense::LE:
        tb.t(i, slack0 + si) = 1.0;
        tb.basis[i] = slack0 + si++;
        break;
      case RowSense::GE:
        tb.t(i, slack0 + si++) = -1.0;
        tb.t(i, art0 + ai) = 1.0;
        tb.basis[i] = art0 + ai++;
        break;
      case RowSense::EQ:
        tb.t(i, art0 + ai) = 1.0;
        tb.basis[i] = art0 + ai++;
        break;
    }
  }

  const int bland_after = 1000 + 50 * static_cast<int>(m + tb.n);
  int iters = 0;

  // enterable(j) limits pricing to the current phase's columns.
  auto run_simplex = [&](const std::function<bool(Index)>& enterable) -> LpStatus {
    for (;; ++iters) {
      if (iters > opts.max_iters)
        throw numeric_error("solve_lp: iteration cap exceeded");
      const bool bland = iters > bland_after;
      Index enter = -1;
      double best = kCostEps;
      for (Index j = 0; j < tb.n; ++j) {
        if (!enterable(j)) continue;
        const double d = tb.obj(j);
        if (d > best) {
          enter = j;
          if (bland) break;
          best = d;
        }
      }
      if (enter < 0) return LpStatus::Optimal;
      Index leave = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (Index i = 0; i < m; ++i) {
        const double aij = tb.t(i, enter);
        if (aij <= kPivotEps) continue;
        const double ratio = tb.rhs(i) / aij;
        if (ratio < best_ratio - 1e-12 ||
            (ratio < best_ratio + 1e-12 && leave >= 0 &&
             tb.basis[i] < tb.basis[leave])) {
          best_ratio = ratio;
          leave = i;
        }
      }
      if (leave < 0) return LpStatus::Unbounded;
      tb.pivot(leave, enter);
    }
  };

  LpSolution sol;

  if (n_art > 0) {
    // Phase I: maximize -(sum of artificials).
    Vector cost1 = Vector::Zero(tb.n);
    cost1.segment(art0, n_art).setConstant(-1.0);
    tb.t.row(m).setZero();
    tb.t.row(m).head(tb.n) = cost1.transpose();
    tb.price_out(cost1);
    const LpStatus st1 = run_simplex([](Index) { return true; });
    (void)st1;  // phase I is bounded above by 0, Unbounded cannot occur
    sol.phase1_residual = tb.t(m, tb.n);  // -value = sum of artificials
    if (sol.phase1_residual > opts.feas_tol) {
      sol.status = LpStatus::Infeasible;
      return sol;
    }
    // Drive basic artificials out on the largest structural/slack entry of
    // their row; a row with none is redundant, so its residues are cleared
    // and the artificial stays basic at level zero.
    for (Index i = 0; i < m; ++i) {
      if (tb.basis[i] < art0) continue;
      Index jbest = -1;
      double abest = 1e-9;
      for (Index j = 0; j < art0; ++j) {
        if (std::abs(tb.t(i, j)) > abest) {
          abest = std::abs(tb.t(i, j));
          jbest = j;
        }
      }
      if (jbest >= 0)
        tb.pivot(i, jbest);
      else
        tb.t.row(i).head(art0).setZero();
    }
  }

  // Phase II.
  Vector cost2 = Vector::Zero(tb.n);
  cost2.head(n_orig) = p.c;
  for (Index j = 0; j < n_orig; ++j)
    if (neg_part[j] >= 0) cost2(neg_part[j]) = -p.c(j);
  tb.t.row(m).setZero();
  tb.t.row(m).head(tb.n) = cost2.transpose();
  tb.price_out(cost2);
  const LpStatus st2 = run_simplex([&](Index j) { return j < art0; });
  if (st2 == LpStatus::Unbounded) {
    sol.status = LpStatus::Unbounded;
    return sol;
  }

  Vector xs = Vector::Zero(tb.n);
  for (Index i = 0; i < m; ++i) xs(tb.basis[i]) = tb.rhs(i);
  sol.x = xs.head(n_orig);
  for (Index j = 0; j < n_orig; ++j)
    if (neg_part[j] >= 0) sol.x(j) -= xs(neg_part[j]);
  sol.value = p.c.dot(sol.x);
  sol.status = LpStatus::Optimal;
  return sol;
}

}  // namespace linsys
