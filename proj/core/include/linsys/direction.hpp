#pragma once

#include <optional>
#include <vector>

#include "linsys/moments.hpp"
#include "linsys/types.hpp"

namespace linsys {

enum class CnRegime { LowDim, HighDim };

struct MethodChoice {
  enum class Kind { Direct, Screening };
  Kind kind = Kind::Screening;
  // 0-based screened index; default is d1 (the -beta column).
  std::optional<Index> j_star;
  CnRegime regime = CnRegime::HighDim;

  static MethodChoice direct(CnRegime r = CnRegime::HighDim);
  static MethodChoice screening(std::optional<Index> j = std::nullopt,
                                CnRegime r = CnRegime::HighDim);
};

// Realized (J*, (J*)^c), both sorted ascending, 0-based.
struct JstarSplit {
  std::vector<Index> j_star;
  std::vector<Index> complement;
};

struct DirectionResult {
  Vector y_hat;  // ||y||_1 <= 1, exact zero when infeasible
  bool feasible = false;
  double t_star = 0.0;
  Vector weights;  // per-j omega, length d1+1
  std::vector<Index> j_star_set;
};

// DIRECT: (J*)^c = the model's deterministic columns (possibly empty).
// SCREENING: J* = {j_star}.
JstarSplit resolve_jstar(const MomentModel& model, const MethodChoice& method);

// LowDim: sqrt(log log n1). HighDim: sqrt(log log log n1 * log(p + d1)).
// Throws std::domain_error when the iterated logarithm is not positive.
double c_n(CnRegime regime, Index n1, Index p, Index d1);

// Preliminary direction: max over ||y||_1 <= 1 of min_{j in J*} of
// sqrt(n1) b_j' M0 y subject to sqrt(n1) b_j' M0 y >= 0 for j in (J*)^c.
// Always feasible (y = 0). The optimum is often attained on a face, not a
// point; the returned optimizer is the face vertex maximizing a fixed
// generic functional, so it is nonzero whenever the face is nontrivial and
// the downstream weights sigma_hat(y0) stay informative.
Vector solve_prelim(const EstimationResult& est1, const JstarSplit& js, Index n1);

// omega_j = sigma_j(y0) for j in J*, c_n * sigma_j(y0) for j in (J*)^c;
// strictly positive via the floor. Length d1+1.
Vector compute_weights(const EstimationResult& est1, const Vector& y0,
                       const JstarSplit& js, const MethodChoice& method,
                       Index n1, double sigma_floor = kDefaultSigmaFloor);

// max t s.t. sqrt(n1) b_j' M0 (y+ - y-) >= t omega_j (j in J*),
//            sqrt(n1) b_j' M0 (y+ - y-) >= omega_j   (j in (J*)^c),
//            1'y+ + 1'y- <= 1, y+- >= 0.
// Infeasible (phase-I residual > 1e-7) yields y_hat = 0, feasible = false.
DirectionResult solve_direction(const EstimationResult& est1,
                                const Vector& weights, const JstarSplit& js,
                                Index n1);

}  // namespace linsys
