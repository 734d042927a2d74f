#include "linsys/direction.hpp"

#include <cmath>

#include "linsys/simplex.hpp"

namespace linsys {

MethodChoice MethodChoice::direct(CnRegime r) {
  MethodChoice m;
  m.kind = Kind::Direct;
  m.regime = r;
  return m;
}

MethodChoice MethodChoice::screening(std::optional<Index> j, CnRegime r) {
  MethodChoice m;
  m.kind = Kind::Screening;
  m.j_star = j;
  m.regime = r;
  return m;
}

JstarSplit resolve_jstar(const MomentModel& model, const MethodChoice& method) {
  model.validate();
  JstarSplit out;
  if (method.kind == MethodChoice::Kind::Direct) {
    out.complement = model.deterministic_columns();
    std::vector<bool> in_comp(model.d1 + 1, false);
    for (Index j : out.complement) in_comp[j] = true;
    for (Index j = 0; j <= model.d1; ++j)
      if (!in_comp[j]) out.j_star.push_back(j);
  } else {
    const Index js = method.j_star.value_or(model.d1);
    require(js >= 0 && js <= model.d1, "resolve_jstar: j_star out of range");
    out.j_star = {js};
    for (Index j = 0; j <= model.d1; ++j)
      if (j != js) out.complement.push_back(j);
  }
  require(!out.j_star.empty(), "resolve_jstar: J* must be nonempty");
  return out;
}

double c_n(CnRegime regime, Index n1, Index p, Index d1) {
  require(n1 >= 1 && p >= 1 && d1 >= 1, "c_n: bad arguments");
  const double ll = std::log(std::log(static_cast<double>(n1)));
  if (regime == CnRegime::LowDim) {
    if (!(ll > 0.0))
      throw std::domain_error("c_n: log(log n1) not positive; n1 too small");
    return std::sqrt(ll);
  }
  const double lll = std::log(ll);
  if (!(lll > 0.0))
    throw std::domain_error("c_n: log(log(log n1)) not positive; n1 too small");
  return std::sqrt(lll * std::log(static_cast<double>(p + d1)));
}

namespace {

// Slack allowed when pinning the optimal face of the preliminary LP.
constexpr double kFaceTol = 1e-9;

// Rows r_j' = b_j' M0 for all j, scaled by sqrt(n1).
Matrix scaled_rows(const EstimationResult& est, Index n1) {
  const double root = std::sqrt(static_cast<double>(n1));
  Matrix r(est.d1 + 1, est.p);
  for (Index j = 0; j <= est.d1; ++j)
    r.row(j) = root * (est.m0 * est.b_hat[j]).transpose();
  return r;
}

// Fixed full-support functional; used only to select among optimal vertices.
Vector tiebreak_direction(Index p) {
  Vector r(p);
  for (Index k = 0; k < p; ++k)
    r(k) = std::cos(2.39996322972865332 * static_cast<double>(k + 1));
  return r;
}

// Shared LP skeleton over variables [y+, y-, t]: objective max t, l1 row,
// one row per j with the given t-coefficient (J*) or rhs (complement).
LpProblem direction_lp(const Matrix& rows, const JstarSplit& js,
                       const Vector* weights) {
  const Index p = rows.cols();
  const Index m = static_cast<Index>(js.j_star.size() + js.complement.size());
  LpProblem lp;
  lp.a.resize(m + 1, 2 * p + 1);
  lp.b = Vector::Zero(m + 1);
  lp.sense.assign(m + 1, RowSense::GE);
  Index i = 0;
  for (Index j : js.j_star) {
    const double w = weights ? (*weights)(j) : 1.0;
    lp.a.row(i) << rows.row(j), -rows.row(j), -w;
    ++i;
  }
  for (Index j : js.complement) {
    lp.a.row(i) << rows.row(j), -rows.row(j), 0.0;
    lp.b(i) = weights ? (*weights)(j) : 0.0;
    ++i;
  }
  lp.a.row(m) << Vector::Ones(2 * p).transpose(), 0.0;
  lp.b(m) = 1.0;
  lp.sense[m] = RowSense::LE;
  lp.c = Vector::Zero(2 * p + 1);
  lp.c(2 * p) = 1.0;
  lp.free_var.assign(2 * p + 1, false);
  lp.free_var[2 * p] = true;
  return lp;
}

}  // namespace

Vector solve_prelim(const EstimationResult& est1, const JstarSplit& js, Index n1) {
  require(n1 >= 1, "solve_prelim: n1 must be >= 1");
  const Matrix rows = scaled_rows(est1, n1);
  const LpProblem lp = direction_lp(rows, js, nullptr);
  const LpSolution sol = solve_lp(lp);
  if (sol.status != LpStatus::Optimal)
    throw numeric_error("solve_prelim: LP did not solve");
  const Index p = est1.p;
  Vector y0 = sol.x.head(p) - sol.x.segment(p, p);
  if (y0.lpNorm<1>() > 1e-9) return y0;

  // The tableau starts at the origin, which is optimal whenever the optimum
  // is zero, yet the argmax is then a whole face: every direction in
  // ker(M0) keeps all rows at zero. Returning the origin would zero out
  // every sigma_hat(y0) downstream, collapsing the weights onto the floor.
  // Re-optimize a fixed generic functional over the face and keep that
  // vertex instead; it is nonzero whenever the face contains a nonzero
  // point.
  const double t_opt = sol.value;
  const Index m = static_cast<Index>(js.j_star.size() + js.complement.size());
  LpProblem face;
  face.a.resize(m + 1, 2 * p);
  face.b = Vector::Zero(m + 1);
  face.sense.assign(m + 1, RowSense::GE);
  Index i = 0;
  for (Index j : js.j_star) {
    face.a.row(i) << rows.row(j), -rows.row(j);
    face.b(i) = t_opt - kFaceTol * std::max(1.0, std::abs(t_opt));
    ++i;
  }
  for (Index j : js.complement) {
    face.a.row(i) << rows.row(j), -rows.row(j);
    ++i;
  }
  face.a.row(m) = Vector::Ones(2 * p).transpose();
  face.b(m) = 1.0;
  face.sense[m] = RowSense::LE;
  const Vector r = tiebreak_direction(p);
  face.c.resize(2 * p);
  face.c << r, -r;
  face.free_var.assign(2 * p, false);
  const LpSolution fsol = solve_lp(face);
  if (fsol.status == LpStatus::Optimal)
    y0 = fsol.x.head(p) - fsol.x.segment(p, p);
  return y0;
}

Vector compute_weights(const EstimationResult& est1, const Vector& y0,
                       const JstarSplit& js, const MethodChoice& method,
                       Index n1, double sigma_floor) {
  require(y0.size() == est1.p, "compute_weights: y0 dimension mismatch");
  const double cn = c_n(method.regime, n1, est1.p, est1.d1);
  Vector w(est1.d1 + 1);
  for (Index j = 0; j <= est1.d1; ++j) {
    const Vector dj = gradient_dj(est1.m0, est1.a0_pinv, est1.b_hat[j], y0);
    w(j) = sigma_hat_from_samples(est1, j, dj, sigma_floor).sigma;
  }
  for (Index j : js.complement) w(j) *= cn;
  return w;
}

DirectionResult solve_direction(const EstimationResult& est1,
                                const Vector& weights, const JstarSplit& js,
                                Index n1) {
  require(weights.size() == est1.d1 + 1, "solve_direction: weights size mismatch");
  require(weights.minCoeff() > 0.0, "solve_direction: weights must be positive");
  const Matrix rows = scaled_rows(est1, n1);
  const LpProblem lp = direction_lp(rows, js, &weights);
  LpOptions opts;
  opts.feas_tol = 1e-7;  // phase-I residual above this means no direction
  const LpSolution sol = solve_lp(lp, opts);

  DirectionResult out;
  out.weights = weights;
  out.j_star_set = js.j_star;
  if (sol.status == LpStatus::Infeasible) {
    out.y_hat = Vector::Zero(est1.p);
    out.feasible = false;
    out.t_star = 0.0;
    return out;
  }
  if (sol.status != LpStatus::Optimal)
    throw numeric_error("solve_direction: LP did not solve");
  out.y_hat = sol.x.head(est1.p) - sol.x.segment(est1.p, est1.p);
  out.feasible = true;
  out.t_star = sol.value;
  return out;
}

}  // namespace linsys
