#include "linsys/closure.hpp"

#include <algorithm>
#include <cmath>

#include "linsys/linalg.hpp"
#include "linsys/simplex.hpp"

namespace linsys {

void Triple::validate() const {
  require(a1.rows() >= 1 && a1.cols() >= 1, "Triple: a1 must be p x d1 with p, d1 >= 1");
  require(beta.size() == a1.rows(), "Triple: beta length must equal a1 rows");
  if (a0) {
    require(a0->rows() == a1.rows(), "Triple: a0 rows must equal a1 rows");
    require(a0->cols() >= 1, "Triple: a0 present but d0 = 0");
    require_finite(*a0, "Triple: a0");
  }
  require_finite(a1, "Triple: a1");
  require_finite(beta, "Triple: beta");
}

C0Result member_c0(const Triple& t, double tol, double rank_tol) {
  t.validate();
  require(tol >= 0.0, "member_c0: tol must be >= 0");
  const Index p = t.p(), d1 = t.d1();
  const Matrix m0 = annihilator(t.a0, p, rank_tol);
  const Matrix g = m0 * t.a1;
  const Vector h = m0 * t.beta;

  // minimize r over x1 >= 0, r >= 0 with |G x1 - h|_inf <= r; always
  // feasible, so membership is just a threshold on the optimum.
  LpProblem lp;
  lp.a.resize(2 * p, d1 + 1);
  lp.b.resize(2 * p);
  lp.sense.assign(2 * p, RowSense::LE);
  for (Index i = 0; i < p; ++i) {
    lp.a.row(i) << g.row(i), -1.0;
    lp.b(i) = h(i);
    lp.a.row(p + i) << -g.row(i), -1.0;
    lp.b(p + i) = -h(i);
  }
  lp.c = Vector::Zero(d1 + 1);
  lp.c(d1) = -1.0;

  const LpSolution sol = solve_lp(lp);
  if (sol.status != LpStatus::Optimal)
    throw numeric_error("member_c0: residual LP did not solve");
  C0Result out;
  out.residual = std::max(0.0, -sol.value);
  out.member = out.residual <= tol;
  if (out.member) out.witness = sol.x.head(d1);
  return out;
}

bool member_crd(const std::optional<Matrix>& a0, double rank_tol) {
  if (!a0) return false;
  return matrix_rank(*a0, rank_tol) < a0->cols();
}

Cbar0Result member_cbar0(const Triple& t, double feasibility_tol,
                         double rank_tol) {
  t.validate();
  const Index p = t.p(), d1 = t.d1();
  const Matrix m0 = annihilator(t.a0, p, rank_tol);

  // Rows r_j = M0 b_j with b_j the columns of A1 and b_{d1+1} = -beta.
  Matrix r(d1 + 1, p);
  r.topRows(d1) = (m0 * t.a1).transpose();
  r.row(d1) = -(m0 * t.beta).transpose();

  // Variables [y+, y-, t], t free: max t s.t. r_j'(y+ - y-) - t >= 0,
  // 1'y+ + 1'y- <= 1.
  LpProblem lp;
  lp.a.resize(d1 + 2, 2 * p + 1);
  lp.b = Vector::Zero(d1 + 2);
  lp.sense.assign(d1 + 2, RowSense::GE);
  for (Index j = 0; j <= d1; ++j)
    lp.a.row(j) << r.row(j), -r.row(j), -1.0;
  lp.a.row(d1 + 1) << Vector::Ones(2 * p).transpose(), 0.0;
  lp.b(d1 + 1) = 1.0;
  lp.sense[d1 + 1] = RowSense::LE;
  lp.c = Vector::Zero(2 * p + 1);
  lp.c(2 * p) = 1.0;
  lp.free_var.assign(2 * p + 1, false);
  lp.free_var[2 * p] = true;

  const LpSolution sol = solve_lp(lp);
  if (sol.status != LpStatus::Optimal)
    throw numeric_error("member_cbar0: sup-min LP did not solve");
  Cbar0Result out;
  out.lp_value = std::max(0.0, sol.value);
  out.member = out.lp_value <= feasibility_tol;
  out.y = sol.x.head(p) - sol.x.segment(p, p);
  return out;
}

MembershipReport member_closure(const Triple& t, const ClosureOptions& opts) {
  const C0Result c0 = member_c0(t, opts.c0_tol, opts.rank_tol);
  const bool crd = member_crd(t.a0, opts.rank_tol);
  const Cbar0Result cb = member_cbar0(t, opts.feasibility_tol, opts.rank_tol);
  MembershipReport rep;
  rep.in_c0 = c0.member;
  rep.in_cbar0 = cb.member;
  rep.in_crd = crd;
  rep.in_closure = cb.member || crd;
  rep.lp_value = cb.lp_value;
  rep.near_boundary = std::abs(cb.lp_value) <= 10.0 * opts.feasibility_tol;
  if (c0.member)
    rep.witness = c0.witness;
  else
    rep.witness = cb.y;
  return rep;
}

}  // namespace linsys
