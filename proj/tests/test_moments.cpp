#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <optional>
#include <vector>

#include "linsys/linalg.hpp"
#include "linsys/moments.hpp"
#include "linsys/rng.hpp"

using namespace linsys;

namespace {

Dataset one_feature(std::vector<double> vals) {
  Dataset d;
  d.feature_names = {"z"};
  d.values = Matrix::Zero(Index(vals.size()), 1);
  for (Index i = 0; i < d.values.rows(); ++i) d.values(i, 0) = vals[size_t(i)];
  return d;
}

Dataset random_dataset(Index n, Index k, Rng& rng) {
  Dataset d;
  for (Index c = 0; c < k; ++c) d.feature_names.push_back("f" + std::to_string(c));
  d.values = Matrix::Zero(n, k);
  for (Index i = 0; i < n; ++i)
    for (Index c = 0; c < k; ++c) d.values(i, c) = 2.0 * rng.uniform() - 1.0 + 0.5 * double(c);
  return d;
}

// Scalar model with a single b column of the given entry plus a constant
// second column standing in for -beta.
MomentModel scalar_model(EntrySpec entry) {
  MomentModel m;
  m.p = 1;
  m.d0 = 0;
  m.d1 = 1;
  m.b_entries = {{std::move(entry), EntrySpec::constant(-1.0)}};
  return m;
}

// Random MEAN-based model: every entry tied to a random feature column.
MomentModel random_mean_model(Index p, Index d0, Index d1, Index k, Rng& rng) {
  MomentModel m;
  m.p = p;
  m.d0 = d0;
  m.d1 = d1;
  if (d0 > 0) {
    m.a0_entries.assign(size_t(p), {});
    for (auto& row : m.a0_entries)
      for (Index c = 0; c < d0; ++c) row.push_back(EntrySpec::mean(Index(rng.below(uint64_t(k)))));
  }
  m.b_entries.assign(size_t(p), {});
  for (auto& row : m.b_entries)
    for (Index c = 0; c <= d1; ++c) row.push_back(EntrySpec::mean(Index(rng.below(uint64_t(k)))));
  return m;
}

Matrix psi_of(const EstimationResult& r, Index i) {
  Matrix out = Matrix::Zero(r.p, r.d0);
  for (Index c = 0; c < r.d0; ++c)
    for (Index q = 0; q < r.p; ++q) out(q, c) = r.psi(i, c * r.p + q);
  return out;
}

}  // namespace

TEST_CASE("constant-only model carries no sampling variation") {
  MomentModel m;
  m.p = 2;
  m.d0 = 1;
  m.d1 = 1;
  m.a0_entries = {{EntrySpec::constant(1.0)}, {EntrySpec::constant(2.0)}};
  m.b_entries = {{EntrySpec::constant(3.0), EntrySpec::constant(-1.0)},
                 {EntrySpec::constant(4.0), EntrySpec::constant(0.5)}};
  Dataset d = one_feature({5.0, 6.0, 7.0});
  const EstimationResult r = estimate(m, d);
  REQUIRE(r.a0_hat.has_value());
  CHECK((*r.a0_hat)(0, 0) == 1.0);
  CHECK((*r.a0_hat)(1, 0) == 2.0);
  CHECK(r.b_hat[0](0) == 3.0);
  CHECK(r.b_hat[1](1) == 0.5);
  CHECK(r.psi.cwiseAbs().maxCoeff() == 0.0);
  CHECK(r.phi[0].cwiseAbs().maxCoeff() == 0.0);
  CHECK(r.phi[1].cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("mean entry reproduces the sample mean and centered influence") {
  const EstimationResult r = estimate(scalar_model(EntrySpec::mean(FeatureRef("z"))),
                                      one_feature({1.0, 2.0, 3.0}));
  CHECK(r.b_hat[0](0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(r.phi[0](0, 0) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(r.phi[0](1, 0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r.phi[0](2, 0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("square transform matches the hand delta-method expansion") {
  // Oracle first: g(m) = m^2 at mbar = 2 has gradient 2*mbar = 4, so the
  // influence of observation z is 4*(z - 2): (-4, 0, 4).
  const std::vector<double> z = {1.0, 2.0, 3.0};
  const double mbar = 2.0;
  std::vector<double> oracle;
  for (double zi : z) oracle.push_back(2.0 * mbar * (zi - mbar));
  CHECK(oracle[0] == -4.0);
  CHECK(oracle[2] == 4.0);

  const EstimationResult r =
      estimate(scalar_model(EntrySpec::smooth("m[0]^2", {FeatureRef("z")})), one_feature(z));
  CHECK(r.b_hat[0](0) == doctest::Approx(4.0).epsilon(1e-10));
  for (Index i = 0; i < 3; ++i)
    CHECK(r.phi[0](i, 0) == doctest::Approx(oracle[size_t(i)]).epsilon(1e-5));
}

TEST_CASE("affine transform agrees with the mean entry route") {
  Rng rng(5);
  Dataset d = random_dataset(40, 1, rng);
  const EstimationResult via_mean =
      estimate(scalar_model(EntrySpec::mean(FeatureRef("f0"))), d);
  const EstimationResult via_smooth =
      estimate(scalar_model(EntrySpec::smooth("2*m[0] + 1 - m[0]", {FeatureRef("f0")})), d);
  CHECK(via_smooth.b_hat[0](0) ==
        doctest::Approx(via_mean.b_hat[0](0) + 1.0).epsilon(1e-12));
  CHECK((via_smooth.phi[0] - via_mean.phi[0]).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("non-finite transform values are rejected") {
  CHECK_THROWS_AS(estimate(scalar_model(EntrySpec::smooth("1/m[0]", {FeatureRef("z")})),
                           one_feature({-1.0, 1.0})),
                  std::invalid_argument);
  CHECK_THROWS_AS(estimate(scalar_model(EntrySpec::mean(FeatureRef("z"))),
                           one_feature({1.0})),
                  std::invalid_argument);
}

TEST_CASE("influence samples are exactly centered") {
  Rng rng(11);
  for (int rep = 0; rep < 5; ++rep) {
    Dataset d = random_dataset(37, 3, rng);
    MomentModel m = random_mean_model(3, 1, 2, 3, rng);
    m.b_entries[0][2] = EntrySpec::smooth("m[0]*m[1]", {FeatureRef("f0"), FeatureRef("f1")});
    const EstimationResult r = estimate(m, d);
    const double n = double(r.n);
    CHECK(r.psi.colwise().sum().cwiseAbs().maxCoeff() <= 1e-9 * n);
    for (const Matrix& ph : r.phi)
      CHECK(ph.colwise().sum().cwiseAbs().maxCoeff() <= 1e-9 * n);
  }
}

TEST_CASE("covariance matches a direct double-loop oracle") {
  Rng rng(23);
  Dataset d = random_dataset(5, 2, rng);
  MomentModel m = random_mean_model(2, 1, 1, 2, rng);
  const EstimationResult r = estimate(m, d);
  const Index j = 1;
  const Matrix v = covariance_vj(r, j);

  // Oracle: explicit stacked samples and a double loop with divisor n.
  const Index dim = r.p * r.d0 + r.p;
  REQUIRE(v.rows() == dim);
  std::vector<Vector> s;
  for (Index i = 0; i < r.n; ++i) {
    Vector si(dim);
    si.head(r.p * r.d0) = r.psi.row(i).transpose();
    si.tail(r.p) = r.phi[j].row(i).transpose();
    s.push_back(si);
  }
  Vector mean = Vector::Zero(dim);
  for (const Vector& si : s) mean += si;
  mean /= double(r.n);
  Matrix oracle = Matrix::Zero(dim, dim);
  for (const Vector& si : s) oracle += (si - mean) * (si - mean).transpose();
  oracle /= double(r.n);
  CHECK((v - oracle).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("covariance degenerate and shape cases") {
  MomentModel m = scalar_model(EntrySpec::mean(FeatureRef("z")));
  const EstimationResult dup = estimate(m, one_feature({2.5, 2.5}));
  CHECK(covariance_vj(dup, 0).cwiseAbs().maxCoeff() <= 1e-15);

  MomentModel c;
  c.p = 1;
  c.d0 = 0;
  c.d1 = 1;
  c.b_entries = {{EntrySpec::constant(1.0), EntrySpec::constant(2.0)}};
  const EstimationResult rc = estimate(c, one_feature({1.0, 2.0}));
  CHECK(covariance_vj(rc, 1).cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(covariance_vj(dup, 2), std::invalid_argument);
}

TEST_CASE("covariance is positive semi-definite") {
  Rng rng(31);
  for (int rep = 0; rep < 10; ++rep) {
    Dataset d = random_dataset(30, 3, rng);
    const EstimationResult r = estimate(random_mean_model(3, 1, 2, 3, rng), d);
    for (Index j = 0; j <= r.d1; ++j) {
      const Matrix v = covariance_vj(r, j);
      Eigen::SelfAdjointEigenSolver<Matrix> es(v);
      CHECK(es.eigenvalues().minCoeff() >= -1e-9 * (1.0 + v.trace()));
    }
  }
}

TEST_CASE("gradient degenerate cases") {
  Vector y(3);
  y << 1.0, -2.0, 0.5;
  Vector b(3);
  b << 0.3, 0.1, -0.2;
  const Vector no_free = gradient_dj(std::nullopt, b, y);
  CHECK((no_free - y).cwiseAbs().maxCoeff() <= 1e-15);

  Matrix a0(3, 1);
  a0 << 1.0, 0.5, -0.25;
  const Vector at_zero = gradient_dj(std::optional<Matrix>(a0), b, Vector(Vector::Zero(3)));
  CHECK(at_zero.size() == 3 * 1 + 3);
  CHECK(at_zero.cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("gradient matches central finite differences") {
  Rng rng(47);
  const double h = 1e-6;
  int done = 0;
  while (done < 20) {
    Matrix a0(3, 1);
    Vector b(3), y(3);
    for (Index i = 0; i < 3; ++i) {
      a0(i, 0) = 4.0 * rng.uniform() - 2.0;
      b(i) = 4.0 * rng.uniform() - 2.0;
      y(i) = 4.0 * rng.uniform() - 2.0;
    }
    if (a0.norm() < 0.5) continue;  // keep the pseudoinverse well-conditioned
    ++done;

    const auto f = [&](const Matrix& a, const Vector& bb) {
      return double(bb.transpose() * annihilator(std::optional<Matrix>(a), 3) * y);
    };
    Vector fd(6);
    for (Index i = 0; i < 3; ++i) {
      Matrix up = a0, dn = a0;
      up(i, 0) += h;
      dn(i, 0) -= h;
      fd(i) = (f(up, b) - f(dn, b)) / (2 * h);
    }
    for (Index i = 0; i < 3; ++i) {
      Vector up = b, dn = b;
      up(i) += h;
      dn(i) -= h;
      fd(3 + i) = (f(a0, up) - f(a0, dn)) / (2 * h);
    }

    const Vector d = gradient_dj(std::optional<Matrix>(a0), b, y);
    REQUIRE(d.size() == 6);
    CHECK((d - fd).cwiseAbs().maxCoeff() <= 1e-5 * (1.0 + fd.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("sigma truncation and arithmetic") {
  const SigmaEstimate floored = sigma_hat(Matrix::Zero(1, 1), Vector::Ones(1), 1e-6);
  CHECK(floored.sigma == doctest::Approx(1e-6).epsilon(1e-12));
  CHECK(floored.truncated);
  CHECK(floored.raw_variance == 0.0);

  const SigmaEstimate unit =
      sigma_hat(Matrix::Constant(1, 1, 4.0), Vector::Constant(1, 0.5), 1e-6);
  CHECK(unit.raw_variance == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(unit.sigma == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_FALSE(unit.truncated);

  CHECK_THROWS_AS(sigma_hat(Matrix::Zero(2, 2), Vector::Ones(3), 1e-6),
                  std::invalid_argument);
}

TEST_CASE("sigma is positively homogeneous in y above the floor") {
  Rng rng(53);
  Matrix g(4, 4);
  for (Index i = 0; i < 4; ++i)
    for (Index j = 0; j < 4; ++j) g(i, j) = 2.0 * rng.uniform() - 1.0;
  const Matrix v = g * g.transpose();
  Vector d(4);
  d << 0.7, -0.3, 0.2, 0.5;
  const SigmaEstimate base = sigma_hat(v, d, 1e-6);
  const SigmaEstimate twice = sigma_hat(v, Vector(2.0 * d), 1e-6);
  REQUIRE_FALSE(base.truncated);
  CHECK(twice.sigma == doctest::Approx(2.0 * base.sigma).epsilon(1e-12));
  CHECK(twice.raw_variance == doctest::Approx(4.0 * base.raw_variance).epsilon(1e-12));
}

TEST_CASE("sample-route sigma equals the materialized quadratic form") {
  Rng rng(59);
  Dataset data = random_dataset(25, 3, rng);
  const EstimationResult r = estimate(random_mean_model(3, 1, 2, 3, rng), data);
  Vector y(3);
  y << 0.4, -1.0, 0.6;
  for (Index j = 0; j <= r.d1; ++j) {
    const Vector dj = gradient_dj(r.m0, r.a0_pinv, r.b_hat[j], y);
    const SigmaEstimate a = sigma_hat(covariance_vj(r, j), dj, 1e-6);
    const SigmaEstimate b = sigma_hat_from_samples(r, j, dj, 1e-6);
    CHECK(b.raw_variance == doctest::Approx(a.raw_variance).epsilon(1e-10));
    CHECK(b.sigma == doctest::Approx(a.sigma).epsilon(1e-10));
  }
}

TEST_CASE("per-observation linearization matches the stacked gradient") {
  // Oracle: xi_{j,i} = M0 phi_{j,i} - (A0^+)' Psi_i' M0 b_j - M0 Psi_i A0^+ b_j
  // assembled by hand; its inner product with y must reproduce the stacked
  // gradient applied to (vec Psi_i, phi_{j,i}), and the sample variance of
  // that scalar must equal the quadratic form D' V D.
  Rng rng(61);
  for (int rep = 0; rep < 8; ++rep) {
    Dataset data = random_dataset(40, 4, rng);
    const EstimationResult r = estimate(random_mean_model(3, 2, 2, 4, rng), data);
    Vector y(3);
    for (Index i = 0; i < 3; ++i) y(i) = 2.0 * rng.uniform() - 1.0;

    for (Index j = 0; j <= r.d1; ++j) {
      const Vector dj = gradient_dj(r.m0, r.a0_pinv, r.b_hat[j], y);
      const Vector m0b = r.m0 * r.b_hat[j];
      double mean_s = 0.0, var_s = 0.0;
      std::vector<double> s(size_t(r.n));
      for (Index i = 0; i < r.n; ++i) {
        const Matrix psi = psi_of(r, i);
        const Vector phi = r.phi[j].row(i).transpose();
        const Vector xi = r.m0 * phi - r.a0_pinv.transpose() * (psi.transpose() * m0b) -
                          r.m0 * (psi * (r.a0_pinv * r.b_hat[j]));
        const double via_xi = xi.dot(y);

        Vector stacked(r.p * r.d0 + r.p);
        stacked.head(r.p * r.d0) = r.psi.row(i).transpose();
        stacked.tail(r.p) = phi;
        const double via_d = dj.dot(stacked);
        CHECK(std::abs(via_xi - via_d) <= 1e-10 * (1.0 + std::abs(via_d)));
        s[size_t(i)] = via_d;
        mean_s += via_d;
      }
      mean_s /= double(r.n);
      for (double si : s) var_s += (si - mean_s) * (si - mean_s);
      var_s /= double(r.n);
      const double quad = sigma_hat(covariance_vj(r, j), dj, 1e-12).raw_variance;
      CHECK(std::abs(var_s - quad) <= 1e-8 * (1.0 + std::abs(quad)));
    }
  }
}

TEST_CASE("deterministic column derivation and override") {
  MomentModel m;
  m.p = 2;
  m.d0 = 1;
  m.d1 = 2;
  m.a0_entries = {{EntrySpec::constant(1.0)}, {EntrySpec::constant(0.0)}};
  m.b_entries = {
      {EntrySpec::constant(1.0), EntrySpec::mean(FeatureRef("z")), EntrySpec::constant(0.0)},
      {EntrySpec::constant(2.0), EntrySpec::constant(1.0), EntrySpec::constant(-1.0)}};
  CHECK(m.derivable_deterministic_columns() == std::vector<Index>{0, 2});
  CHECK(m.deterministic_columns() == std::vector<Index>{0, 2});

  m.deterministic_override = std::vector<Index>{0};
  CHECK(m.deterministic_columns() == std::vector<Index>{0});
  m.deterministic_override = std::vector<Index>{0, 1};
  CHECK_THROWS_AS(m.validate(), std::invalid_argument);

  // A non-constant a0 entry disables every column.
  m.deterministic_override.reset();
  m.a0_entries[0][0] = EntrySpec::mean(FeatureRef("z"));
  CHECK(m.derivable_deterministic_columns().empty());
}

TEST_CASE("dataset plumbing") {
  Dataset d;
  d.feature_names = {"a", "b"};
  d.values = Matrix::Zero(3, 2);
  d.values << 1, 2, 3, 4, 5, 6;
  CHECK(d.column("b") == 1);
  CHECK_THROWS_AS(d.column("missing"), std::invalid_argument);
  const Dataset sub = d.rows({2, 0});
  CHECK(sub.n() == 2);
  CHECK(sub.values(0, 0) == 5.0);
  CHECK(sub.values(1, 1) == 2.0);
  d.feature_names = {"a"};
  CHECK_THROWS_AS(d.validate(), std::invalid_argument);
}
