#pragma once

#include <optional>

#include "linsys/linalg.hpp"
#include "linsys/types.hpp"

namespace linsys {

// Coefficient triple of the system A0 x0 + A1 x1 = beta, x1 >= 0, x0 free.
// a0 absent means there is no free block (d0 = 0).
struct Triple {
  std::optional<Matrix> a0;  // p x d0
  Matrix a1;                 // p x d1, d1 >= 1
  Vector beta;               // p

  Index p() const { return a1.rows(); }
  Index d0() const { return a0 ? a0->cols() : 0; }
  Index d1() const { return a1.cols(); }
  void validate() const;
};

struct ClosureOptions {
  double c0_tol = 1e-8;           // equality band per row of the projected system
  double feasibility_tol = 1e-8;  // verdict band on the sup-min value t*
  double rank_tol = 1e-10;
};

struct C0Result {
  bool member = false;
  double residual = 0.0;  // minimal attainable max-row residual
  std::optional<Vector> witness;  // feasible x1 when member
};

struct Cbar0Result {
  bool member = false;
  double lp_value = 0.0;  // t* = sup over the l1 ball of the row minimum
  Vector y;               // optimizer, a separating direction when t* > 0
};

struct MembershipReport {
  bool in_c0 = false;
  bool in_cbar0 = false;
  bool in_crd = false;
  bool in_closure = false;
  double lp_value = 0.0;
  // The verdict band is a convention; flag decisions resting on it.
  bool near_boundary = false;
  std::optional<Vector> witness;
};

// Feasibility of {x1 >= 0 : M0 A1 x1 = M0 beta} with each equality relaxed
// to a +-tol band, solved as an LP minimizing the max row residual.
C0Result member_c0(const Triple& t, double tol = 1e-8,
                   double rank_tol = kDefaultRankTol);

// Rank-deficient set: a0 present with numerical rank < d0. Covers p < d0
// automatically since rank <= p.
bool member_crd(const std::optional<Matrix>& a0,
                double rank_tol = kDefaultRankTol);

// max t s.t. (M0 a_j)'y >= t for all j <= d1, (-M0 beta)'y >= t, ||y||_1 <= 1,
// via the split y = y+ - y-. t* >= 0 always (y = 0); member iff t* <= tol.
Cbar0Result member_cbar0(const Triple& t, double feasibility_tol = 1e-8,
                         double rank_tol = kDefaultRankTol);

MembershipReport member_closure(const Triple& t,
                                const ClosureOptions& opts = {});

}  // namespace linsys
