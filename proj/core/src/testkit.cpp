#include "linsys/testkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "linsys/linalg.hpp"
#include "linsys/rng.hpp"
#include "linsys/threading.hpp"

namespace linsys {

namespace {

constexpr std::uint64_t kSplitStream = 0x73706c6974ULL;
constexpr std::uint64_t kPointStream = 0x706f696e74ULL;

}  // namespace

SplitPlan split(Index n, double fraction, std::uint64_t seed) {
  require(n >= 4, "split: need n >= 4");
  require(fraction > 0.0 && fraction < 1.0, "split: fraction must be in (0,1)");
  const Index n1 = static_cast<Index>(std::llround(fraction * static_cast<double>(n)));
  require(n1 >= 2 && n - n1 >= 2, "split: both parts need at least 2 rows");

  std::vector<Index> idx(n);
  std::iota(idx.begin(), idx.end(), Index{0});
  Rng rng(derive_seed(seed, kSplitStream));
  for (Index i = n - 1; i > 0; --i) {
    const Index j = static_cast<Index>(rng.below(static_cast<std::uint64_t>(i) + 1));
    std::swap(idx[i], idx[j]);
  }

  SplitPlan plan;
  plan.n = n;
  plan.fraction = fraction;
  plan.seed = seed;
  plan.indices_1.assign(idx.begin(), idx.begin() + n1);
  plan.indices_2.assign(idx.begin() + n1, idx.end());
  std::sort(plan.indices_1.begin(), plan.indices_1.end());
  std::sort(plan.indices_2.begin(), plan.indices_2.end());
  return plan;
}

double normal_cdf(double x) {
  return 0.5 * std::erfc(-x * 0.7071067811865475244008443621);
}

double normal_quantile(double q) {
  require(q > 0.0 && q < 1.0, "normal_quantile: q must be in (0,1)");
  // Acklam's rational approximation (|error| < 1.15e-9), then one Newton
  // step against the erfc-based cdf.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425, phigh = 1.0 - plow;
  double x;
  if (q < plow) {
    const double u = std::sqrt(-2.0 * std::log(q));
    x = (((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) /
        ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
  } else if (q <= phigh) {
    const double u = q - 0.5;
    const double r = u * u;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * u /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double u = std::sqrt(-2.0 * std::log(1.0 - q));
    x = -(((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) /
        ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
  }
  const double pdf =
      0.3989422804014326779399461 * std::exp(-0.5 * x * x);
  if (pdf > 0.0) x -= (normal_cdf(x) - q) / pdf;
  return x;
}

StatResult test_statistic(const EstimationResult& est2, const Vector& y_hat,
                          const JstarSplit& js, Index n2, double sigma_floor) {
  require(y_hat.size() == est2.p, "test_statistic: y_hat dimension mismatch");
  require(n2 >= 1, "test_statistic: n2 must be >= 1");
  StatResult out;
  if (y_hat.isZero(0.0)) return out;  // t_n = 0, argmin sentinel

  const double root = std::sqrt(static_cast<double>(n2));
  out.sigmas.resize(static_cast<Index>(js.j_star.size()));
  double best = std::numeric_limits<double>::infinity();
  Index k = 0;
  for (Index j : js.j_star) {
    const double num = root * est2.b_hat[j].dot(est2.m0 * y_hat);
    const Vector dj = gradient_dj(est2.m0, est2.a0_pinv, est2.b_hat[j], y_hat);
    const SigmaEstimate se = sigma_hat_from_samples(est2, j, dj, sigma_floor);
    out.sigmas(k) = se.sigma;
    if (se.truncated) ++out.truncation_hits;
    const double t = num / se.sigma;
    if (t < best) {
      best = t;
      out.argmin_j = j;
    }
    ++k;
  }
  out.t_n = best;
  return out;
}

double aggregate_pvalues(const std::vector<double>& p_list, PvalCombiner combiner) {
  require(!p_list.empty(), "aggregate_pvalues: empty list");
  for (double p : p_list)
    require(p >= 0.0 && p <= 1.0, "aggregate_pvalues: p outside [0,1]");
  if (combiner == PvalCombiner::ExchangeableTwiceMean)
    throw std::invalid_argument(
        "aggregate_pvalues: the exchangeable twice-the-average combiner is a "
        "declared strategy slot without an implementation; use TwiceMean");
  const double mean =
      std::accumulate(p_list.begin(), p_list.end(), 0.0) / p_list.size();
  return std::min(1.0, 2.0 * mean);
}

namespace {

void validate_options(const TestOptions& opts) {
  require(opts.alpha > 0.0 && opts.alpha < 0.5,
          "run_test: alpha must be in (0, 0.5)");
  require(opts.splits >= 1, "run_test: splits must be >= 1");
  require(opts.sigma_floor > 0.0, "run_test: sigma_floor must be > 0");
  require(opts.split_fraction > 0.0 && opts.split_fraction < 1.0,
          "run_test: split_fraction must be in (0,1)");
  require(opts.rank_tau >= 0.0, "run_test: rank_tau must be >= 0");
}

TestOutcome single_split_run(const MomentModel& model, const Dataset& data,
                             const MethodChoice& method, const TestOptions& opts,
                             std::uint64_t split_seed) {
  TestOutcome o;
  o.alpha = opts.alpha;
  o.n = data.n();

  const SplitPlan plan = split(data.n(), opts.split_fraction, split_seed);
  o.n1 = static_cast<Index>(plan.indices_1.size());
  o.n2 = static_cast<Index>(plan.indices_2.size());

  const JstarSplit js = resolve_jstar(model, method);
  o.j_star_set = js.j_star;

  const Dataset data1 = data.rows(plan.indices_1);
  const EstimationResult est1 = estimate(model, data1, opts.rank_tol);

  o.y_hat = Vector::Zero(model.p);
  if (opts.rank_tau > 0.0 && model.d0 > 0) {
    const Vector sv = singular_values(*est1.a0_hat);
    const double smin = sv.size() == model.d0 ? sv(sv.size() - 1) : 0.0;
    if (!(smin > opts.rank_tau)) {
      o.rank_gate_triggered = true;
      o.t_n = 0.0;
      o.p_value = 0.5;
      o.reject = false;
      return o;
    }
  }

  const Vector y0 = solve_prelim(est1, js, o.n1);
  const Vector w = compute_weights(est1, y0, js, method, o.n1, opts.sigma_floor);
  const DirectionResult dir = solve_direction(est1, w, js, o.n1);
  o.weights = dir.weights;
  o.t_star = dir.t_star;
  o.direction_feasible = dir.feasible;
  o.y_hat = dir.y_hat;

  if (!dir.feasible) {
    o.t_n = 0.0;
    o.p_value = 0.5;
    o.reject = false;
    return o;
  }

  const Dataset data2 = data.rows(plan.indices_2);
  const EstimationResult est2 = estimate(model, data2, opts.rank_tol);
  const StatResult st = test_statistic(est2, dir.y_hat, js, o.n2, opts.sigma_floor);
  o.t_n = st.t_n;
  o.argmin_j = st.argmin_j;
  o.sigma_values = st.sigmas;
  o.truncation_hits = st.truncation_hits;
  o.p_value = 1.0 - normal_cdf(st.t_n);
  o.reject = st.t_n > normal_quantile(1.0 - opts.alpha);
  return o;
}

}  // namespace

TestOutcome run_test(const MomentModel& model, const Dataset& data,
                     const MethodChoice& method, const TestOptions& opts) {
  validate_options(opts);
  model.validate();
  data.validate();
  require(data.n() >= 4, "run_test: need at least 4 observations");

  // Split m = 0 uses opts.seed directly, so split(n, fraction, opts.seed)
  // reproduces the plan of a single-split run.
  std::vector<TestOutcome> runs(opts.splits);
  for (Index m = 0; m < opts.splits; ++m)
    runs[m] = single_split_run(
        model, data, method, opts,
        m == 0 ? opts.seed
               : derive_seed(opts.seed, static_cast<std::uint64_t>(m), kSplitStream));

  TestOutcome out = runs[0];
  out.splits_used = opts.splits;
  out.split_pvalues.reserve(runs.size());
  for (const auto& r : runs) out.split_pvalues.push_back(r.p_value);
  if (opts.splits > 1) {
    out.p_value = aggregate_pvalues(out.split_pvalues, opts.combiner);
    out.reject = out.p_value < opts.alpha;
    for (const auto& r : runs)
      out.rank_gate_triggered = out.rank_gate_triggered || r.rank_gate_triggered;
  }
  return out;
}

ConfidenceSet invert_ci(const std::function<MomentModel(double)>& model_family,
                        const Dataset& data, const MethodChoice& method,
                        const TestOptions& opts, const std::vector<double>& grid,
                        SeedPolicy seed_policy) {
  validate_options(opts);
  require(!grid.empty(), "invert_ci: empty grid");
  for (std::size_t i = 1; i < grid.size(); ++i)
    require(grid[i] > grid[i - 1], "invert_ci: grid must be strictly increasing");

  const auto seed_for = [&](std::size_t i) {
    return seed_policy == SeedPolicy::Reuse
               ? opts.seed
               : derive_seed(opts.seed, static_cast<std::uint64_t>(i), kPointStream);
  };
  const auto p_at = [&](double value, std::size_t seed_index) {
    TestOptions o = opts;
    o.seed = seed_for(seed_index);
    return run_test(model_family(value), data, method, o).p_value;
  };

  ConfidenceSet cs;
  cs.alpha = opts.alpha;
  cs.grid = grid;
  cs.p_values.assign(grid.size(), 0.0);
  parallel_for(grid.size(), [&](std::size_t i) {
    cs.p_values[i] = p_at(grid[i], i);
  });
  cs.accepted.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    cs.accepted[i] = cs.p_values[i] >= opts.alpha;

  std::size_t lo = grid.size(), hi = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (cs.accepted[i]) {
      lo = std::min(lo, i);
      hi = std::max(hi, i);
    }
  }
  if (lo == grid.size()) return cs;  // nothing accepted, no hull

  // Bisect each outer accept/reject transition down to (local step) / 2^8.
  const auto refine = [&](double rejected, double accepted, std::size_t seed_index) {
    for (int it = 0; it < 8; ++it) {
      const double mid = 0.5 * (rejected + accepted);
      if (p_at(mid, seed_index) >= opts.alpha) accepted = mid;
      else rejected = mid;
    }
    return accepted;
  };
  double left = grid[lo], right = grid[hi];
  if (lo > 0) left = refine(grid[lo - 1], grid[lo], lo);
  if (hi + 1 < grid.size()) right = refine(grid[hi + 1], grid[hi], hi);
  cs.interval_hull = std::make_pair(left, right);
  return cs;
}

}  // namespace linsys
