#pragma once

#include <vector>

#include "linsys/types.hpp"

namespace linsys {

enum class RowSense { LE, GE, EQ };

enum class LpStatus { Optimal, Infeasible, Unbounded };

// maximize c'x subject to a x (sense) b, with x_j >= 0 unless free_var[j].
// Small dense problems only; solved by a two-phase tableau simplex.
struct LpProblem {
  Matrix a;
  Vector b;
  std::vector<RowSense> sense;
  Vector c;
  std::vector<bool> free_var;  // empty means all variables non-negative
};

struct LpOptions {
  // Phase-I residual above this is reported as Infeasible; at or below it
  // the basis is accepted and phase II runs.
  double feas_tol = 1e-9;
  int max_iters = 200000;
};

struct LpSolution {
  LpStatus status = LpStatus::Optimal;
  Vector x;                      // valid when Optimal
  double value = 0.0;            // c'x when Optimal
  double phase1_residual = 0.0;  // minimal attainable sum of artificials
};

// Throws numeric_error if the iteration cap is hit (cycling/stall), and
// std::invalid_argument on dimension mismatch or non-finite input.
LpSolution solve_lp(const LpProblem& p, const LpOptions& opts = {});

}  // namespace linsys
