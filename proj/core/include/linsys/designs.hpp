#pragma once

#include <cstdint>

#include "linsys/closure.hpp"
#include "linsys/testkit.hpp"

namespace linsys {

// Built-in simulation family. The hypothesized value enters only the
// model (through beta), never the data distribution.
struct Design {
  enum class Kind { Cox, Goff, FH };
  Kind kind = Kind::Cox;
  Index H = 3;  // Cox panel count; ignored otherwise

  static Design cox(Index H) { return {Kind::Cox, H}; }
  static Design goff() { return {Kind::Goff, 0}; }
  static Design fh() { return {Kind::FH, 0}; }

  Dataset data(Index n, std::uint64_t seed) const;
  MomentModel model(double hypothesized_value) const;
  Triple population_triple(double hypothesized_value) const;
};

struct GenResult {
  Dataset data;
  MomentModel model;
};

// Interval-censoring style design: X ~ N(mu, I_H) with mu = (-1,1,...,1),
// C ~ N(nu, 2 I_H) with nu = (1,-1,...,-1); A0 = E[C] (p x 1), A1 = I_H,
// beta = -mu - v*theta with v = (1,1,0,...,0). Identified set (-inf, 0].
GenResult gen_cox(Index H, double theta, Index n, std::uint64_t seed);

// Quadratic marginal-response bounds design: binary instrument with
// propensities p(0) = 1/3, p(1) = 2/3, response threshold 1 - u + 0.5u^2;
// five moment rows over (theta0, theta1_tilde, delta, slack1, slack2) >= 0,
// target row equal to the hypothesized average effect tau0. Identified set
// [0.58, 0.67].
GenResult gen_goff(double tau0, Index n, std::uint64_t seed);

// Monotone-regression bounds design: (X, W) from a 6x2 probability table,
// Y = g(X) + X Z^2 - E[X|W] with Z ~ N(0,1); A0 = [Pi'; S; e_1'] with S the
// first-difference matrix, A1 the slack block, beta = (E[Y 1{W=k}]; 0; L0).
// Identified set [20.21, 24.61] for L(g) = g(2).
GenResult gen_fh(double L0, Index n, std::uint64_t seed);

struct RejectionCurve {
  std::vector<double> grid;
  std::vector<double> reject_direct, se_direct;
  std::vector<double> reject_screening, se_screening;
  Index reps = 0;
  Index n = 0;
};

// Rejection frequencies over the grid, both methods on identical data per
// replication. Data seeds derive from (base_seed, grid_index, rep), so the
// curve is reproducible and replication order is irrelevant.
RejectionCurve monte_carlo(const Design& design, const std::vector<double>& grid,
                           Index reps, Index n, const MethodChoice& direct_method,
                           const MethodChoice& screening_method,
                           const TestOptions& opts, std::uint64_t base_seed);

}  // namespace linsys
