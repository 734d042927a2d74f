#include "linsys/designs.hpp"

#include <cmath>
#include <string>

#include "linsys/rng.hpp"
#include "linsys/threading.hpp"

namespace linsys {

namespace {

constexpr std::uint64_t kRunStream = 0x72756eULL;

// Cox: mu = (-1, 1, ..., 1), nu = (1, -1, ..., -1), v = (1, 1, 0, ..., 0).
Vector cox_mu(Index h) {
  Vector m = Vector::Ones(h);
  m(0) = -1.0;
  return m;
}

Vector cox_nu(Index h) {
  Vector m = -Vector::Ones(h);
  m(0) = 1.0;
  return m;
}

Dataset cox_data(Index H, Index n, std::uint64_t seed) {
  const Vector mu = cox_mu(H), nu = cox_nu(H);
  const double root2 = std::sqrt(2.0);
  Dataset d;
  for (Index h = 0; h < H; ++h) d.feature_names.push_back("x" + std::to_string(h + 1));
  for (Index h = 0; h < H; ++h) d.feature_names.push_back("c" + std::to_string(h + 1));
  d.values.resize(n, 2 * H);
  Rng rng(seed);
  for (Index i = 0; i < n; ++i) {
    for (Index h = 0; h < H; ++h) d.values(i, h) = mu(h) + rng.normal();
    for (Index h = 0; h < H; ++h) d.values(i, H + h) = nu(h) + root2 * rng.normal();
  }
  return d;
}

MomentModel cox_model(Index H, double theta) {
  MomentModel m;
  m.p = H;
  m.d0 = 1;
  m.d1 = H;
  m.null_value = theta;
  m.a0_entries.resize(H);
  m.b_entries.resize(H);
  for (Index r = 0; r < H; ++r) {
    m.a0_entries[r] = {EntrySpec::mean(FeatureRef("c" + std::to_string(r + 1)))};
    m.b_entries[r].resize(H + 1);
    for (Index j = 0; j < H; ++j)
      m.b_entries[r][j] = EntrySpec::constant(r == j ? 1.0 : 0.0);
    // Last column is -beta = mu + v*theta; v loads the first two rows.
    const std::string xr = "x" + std::to_string(r + 1);
    if (r < 2)
      m.b_entries[r][H] = EntrySpec::smooth("m[0] + v", {FeatureRef(xr)});
    else
      m.b_entries[r][H] = EntrySpec::mean(FeatureRef(xr));
  }
  return m;
}

Triple cox_triple(Index H, double theta) {
  Triple t;
  t.a0 = cox_nu(H);
  t.a1 = Matrix::Identity(H, H);
  Vector v = Vector::Zero(H);
  v(0) = v(1) = 1.0;
  t.beta = -cox_mu(H) - v * theta;
  return t;
}

// Goff: propensities and response-threshold parameters.
constexpr double kGoffP0 = 1.0 / 3.0, kGoffP1 = 2.0 / 3.0;
constexpr double kGoffTheta0 = 1.0, kGoffTheta1 = -1.0, kGoffTheta2 = 0.5;

Dataset goff_data(Index n, std::uint64_t seed) {
  Dataset d;
  d.feature_names = {"z0", "dz0", "ydz0", "z1", "dz1", "ydz1"};
  d.values = Matrix::Zero(n, 6);
  Rng rng(seed);
  for (Index i = 0; i < n; ++i) {
    const int z = rng.uniform() <= 0.5 ? 0 : 1;
    const double u = rng.uniform();
    const double v = rng.uniform();
    const double pz = z == 0 ? kGoffP0 : kGoffP1;
    const double dd = u <= pz ? 1.0 : 0.0;
    const double resp = kGoffTheta0 + kGoffTheta1 * u + kGoffTheta2 * u * u;
    const double y = dd * (v <= resp ? 1.0 : 0.0);
    d.values(i, 3 * z + 0) = 1.0;
    d.values(i, 3 * z + 1) = dd;
    d.values(i, 3 * z + 2) = y;
  }
  return d;
}

MomentModel goff_model(double tau0) {
  // Propensity ratio q = E[D 1{Z=z}] / P{Z=z} as an expression over the
  // base means (m[0], m[1], m[2]) = (z, dz, ydz) features.
  const std::string q = "(m[1]/m[0])";
  const std::vector<std::string> poly = {
      q + " - " + q + "^3/3",
      q + "^3/3 - " + q + "^2/2",
      q + "^3/3",
  };
  MomentModel m;
  m.p = 5;
  m.d0 = 0;
  m.d1 = 5;
  m.null_value = tau0;
  m.b_entries.assign(5, std::vector<EntrySpec>(6));
  const Matrix lower{{1.0, 0.0, 0.0, 1.0, 0.0},
                     {-2.0, 1.0, 2.0, 0.0, 1.0},
                     {2.0 / 3.0, -1.0 / 6.0, 1.0 / 3.0, 0.0, 0.0}};
  for (Index z = 0; z < 2; ++z) {
    const std::string zs = std::to_string(z);
    const std::vector<FeatureRef> feats = {FeatureRef("z" + zs),
                                           FeatureRef("dz" + zs),
                                           FeatureRef("ydz" + zs)};
    for (Index j = 0; j < 3; ++j)
      m.b_entries[z][j] = EntrySpec::smooth(poly[j], feats);
    m.b_entries[z][3] = EntrySpec::constant(0.0);
    m.b_entries[z][4] = EntrySpec::constant(0.0);
    m.b_entries[z][5] = EntrySpec::smooth("-(m[2]/m[0])", feats);
  }
  for (Index r = 0; r < 3; ++r)
    for (Index j = 0; j < 5; ++j)
      m.b_entries[2 + r][j] = EntrySpec::constant(lower(r, j));
  m.b_entries[2][5] = EntrySpec::constant(-1.0);
  m.b_entries[3][5] = EntrySpec::constant(0.0);
  m.b_entries[4][5] = EntrySpec::smooth("-v", {});
  return m;
}

Triple goff_triple(double tau0) {
  const auto yd = [](double q) {
    return q + kGoffTheta1 * q * q / 2.0 + kGoffTheta2 * q * q * q / 3.0;
  };
  const auto row = [](double q) {
    return Vector{{q - q * q * q / 3.0, q * q * q / 3.0 - q * q / 2.0,
                   q * q * q / 3.0, 0.0, 0.0}};
  };
  Triple t;
  t.a1.resize(5, 5);
  t.a1.row(0) = row(kGoffP0).transpose();
  t.a1.row(1) = row(kGoffP1).transpose();
  t.a1.row(2) << 1, 0, 0, 1, 0;
  t.a1.row(3) << -2, 1, 2, 0, 1;
  t.a1.row(4) << 2.0 / 3.0, -1.0 / 6.0, 1.0 / 3.0, 0, 0;
  t.beta = Vector{{yd(kGoffP0), yd(kGoffP1), 1.0, 0.0, tau0}};
  return t;
}

// FH: joint table over X in {2..7} (rows) and W in {0,1} (columns).
const double kFhPi[6][2] = {{0.20, 0.15}, {0.10, 0.12}, {0.06, 0.07},
                            {0.05, 0.08}, {0.03, 0.06}, {0.03, 0.05}};
const double kFhG[6] = {23, 17, 13, 11, 9, 8};

double fh_exw(int k) {
  double num = 0.0, den = 0.0;
  for (int h = 0; h < 6; ++h) {
    num += (h + 2) * kFhPi[h][k];
    den += kFhPi[h][k];
  }
  return num / den;
}

Dataset fh_data(Index n, std::uint64_t seed) {
  Dataset d;
  for (int h = 0; h < 6; ++h)
    for (int k = 0; k < 2; ++k)
      d.feature_names.push_back("x" + std::to_string(h + 2) + "w" + std::to_string(k));
  d.feature_names.push_back("yw0");
  d.feature_names.push_back("yw1");
  d.values = Matrix::Zero(n, 14);
  const double exw[2] = {fh_exw(0), fh_exw(1)};
  Rng rng(seed);
  for (Index i = 0; i < n; ++i) {
    const double u = rng.uniform();
    int h = 5, k = 1;
    double cum = 0.0;
    for (int hh = 0; hh < 6 && u > cum; ++hh)
      for (int kk = 0; kk < 2; ++kk) {
        cum += kFhPi[hh][kk];
        if (u <= cum) {
          h = hh;
          k = kk;
          break;
        }
      }
    const double z = rng.normal();
    const double x = h + 2;
    const double y = kFhG[h] + x * z * z - exw[k];
    d.values(i, 2 * h + k) = 1.0;
    d.values(i, 12 + k) = y;
  }
  return d;
}

MomentModel fh_model(double L0) {
  MomentModel m;
  m.p = 8;
  m.d0 = 6;
  m.d1 = 5;
  m.null_value = L0;
  m.a0_entries.assign(8, std::vector<EntrySpec>(6));
  m.b_entries.assign(8, std::vector<EntrySpec>(6));
  for (Index r = 0; r < 8; ++r)
    for (Index c = 0; c < 6; ++c)
      m.a0_entries[r][c] = EntrySpec::constant(0.0);
  for (Index k = 0; k < 2; ++k)
    for (Index h = 0; h < 6; ++h)
      m.a0_entries[k][h] = EntrySpec::mean(
          FeatureRef("x" + std::to_string(h + 2) + "w" + std::to_string(k)));
  for (Index s = 0; s < 5; ++s) {
    m.a0_entries[2 + s][s] = EntrySpec::constant(-1.0);
    m.a0_entries[2 + s][s + 1] = EntrySpec::constant(1.0);
  }
  m.a0_entries[7][0] = EntrySpec::constant(1.0);

  for (Index r = 0; r < 8; ++r)
    for (Index j = 0; j < 6; ++j)
      m.b_entries[r][j] = EntrySpec::constant(0.0);
  for (Index s = 0; s < 5; ++s)
    m.b_entries[2 + s][s] = EntrySpec::constant(1.0);  // slack block I_5
  m.b_entries[0][5] = EntrySpec::smooth("-m[0]", {FeatureRef("yw0")});
  m.b_entries[1][5] = EntrySpec::smooth("-m[0]", {FeatureRef("yw1")});
  m.b_entries[7][5] = EntrySpec::smooth("-v", {});
  return m;
}

Triple fh_triple(double L0) {
  Triple t;
  Matrix a0 = Matrix::Zero(8, 6);
  for (int k = 0; k < 2; ++k)
    for (int h = 0; h < 6; ++h)
      a0(k, h) = kFhPi[h][k];
  for (int s = 0; s < 5; ++s) {
    a0(2 + s, s) = -1.0;
    a0(2 + s, s + 1) = 1.0;
  }
  a0(7, 0) = 1.0;
  t.a0 = a0;
  t.a1 = Matrix::Zero(8, 5);
  t.a1.block(2, 0, 5, 5) = Matrix::Identity(5, 5);
  t.beta = Vector::Zero(8);
  for (int k = 0; k < 2; ++k)
    for (int h = 0; h < 6; ++h)
      t.beta(k) += kFhG[h] * kFhPi[h][k];
  t.beta(7) = L0;
  return t;
}

}  // namespace

Dataset Design::data(Index n, std::uint64_t seed) const {
  require(n >= 20, "Design::data: need n >= 20");
  switch (kind) {
    case Kind::Cox:
      require(H >= 2, "Design::data: Cox needs H >= 2");
      return cox_data(H, n, seed);
    case Kind::Goff: return goff_data(n, seed);
    case Kind::FH: return fh_data(n, seed);
  }
  throw std::invalid_argument("Design::data: bad kind");
}

MomentModel Design::model(double hypothesized_value) const {
  switch (kind) {
    case Kind::Cox:
      require(H >= 2, "Design::model: Cox needs H >= 2");
      return cox_model(H, hypothesized_value);
    case Kind::Goff: return goff_model(hypothesized_value);
    case Kind::FH: return fh_model(hypothesized_value);
  }
  throw std::invalid_argument("Design::model: bad kind");
}

Triple Design::population_triple(double hypothesized_value) const {
  switch (kind) {
    case Kind::Cox:
      require(H >= 2, "Design::population_triple: Cox needs H >= 2");
      return cox_triple(H, hypothesized_value);
    case Kind::Goff: return goff_triple(hypothesized_value);
    case Kind::FH: return fh_triple(hypothesized_value);
  }
  throw std::invalid_argument("Design::population_triple: bad kind");
}

GenResult gen_cox(Index H, double theta, Index n, std::uint64_t seed) {
  const Design d = Design::cox(H);
  return {d.data(n, seed), d.model(theta)};
}

GenResult gen_goff(double tau0, Index n, std::uint64_t seed) {
  const Design d = Design::goff();
  return {d.data(n, seed), d.model(tau0)};
}

GenResult gen_fh(double L0, Index n, std::uint64_t seed) {
  const Design d = Design::fh();
  return {d.data(n, seed), d.model(L0)};
}

RejectionCurve monte_carlo(const Design& design, const std::vector<double>& grid,
                           Index reps, Index n, const MethodChoice& direct_method,
                           const MethodChoice& screening_method,
                           const TestOptions& opts, std::uint64_t base_seed) {
  require(!grid.empty(), "monte_carlo: empty grid");
  require(reps >= 1, "monte_carlo: reps must be >= 1");

  std::vector<MomentModel> models;
  models.reserve(grid.size());
  for (double value : grid) models.push_back(design.model(value));

  const std::size_t tasks = grid.size() * static_cast<std::size_t>(reps);
  std::vector<unsigned char> rej_d(tasks, 0), rej_s(tasks, 0);
  parallel_for(tasks, [&](std::size_t task) {
    const std::size_t gi = task / static_cast<std::size_t>(reps);
    const std::size_t rep = task % static_cast<std::size_t>(reps);
    const std::uint64_t rep_seed = derive_seed(base_seed, gi, rep);
    const Dataset data = design.data(n, rep_seed);
    TestOptions run_opts = opts;
    run_opts.seed = derive_seed(rep_seed, kRunStream);
    rej_d[task] = run_test(models[gi], data, direct_method, run_opts).reject;
    rej_s[task] = run_test(models[gi], data, screening_method, run_opts).reject;
  });

  RejectionCurve curve;
  curve.grid = grid;
  curve.reps = reps;
  curve.n = n;
  const double r = static_cast<double>(reps);
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    double fd = 0.0, fs = 0.0;
    for (Index rep = 0; rep < reps; ++rep) {
      fd += rej_d[gi * reps + rep];
      fs += rej_s[gi * reps + rep];
    }
    fd /= r;
    fs /= r;
    curve.reject_direct.push_back(fd);
    curve.se_direct.push_back(std::sqrt(fd * (1.0 - fd) / r));
    curve.reject_screening.push_back(fs);
    curve.se_screening.push_back(std::sqrt(fs * (1.0 - fs) / r));
  }
  return curve;
}

}  // namespace linsys
