#include "linsys/moments.hpp"

#include <cmath>
#include <unordered_map>

#include "linsys/linalg.hpp"

namespace linsys {

Index Dataset::column(const std::string& name) const {
  for (Index k = 0; k < static_cast<Index>(feature_names.size()); ++k)
    if (feature_names[k] == name) return k;
  throw std::invalid_argument("Dataset: unknown feature name '" + name + "'");
}

Dataset Dataset::rows(const std::vector<Index>& idx) const {
  Dataset out;
  out.feature_names = feature_names;
  out.values.resize(static_cast<Index>(idx.size()), values.cols());
  for (Index i = 0; i < static_cast<Index>(idx.size()); ++i)
    out.values.row(i) = values.row(idx[i]);
  return out;
}

void Dataset::validate() const {
  require(feature_names.empty() ||
              static_cast<Index>(feature_names.size()) == values.cols(),
          "Dataset: header size does not match column count");
  require_finite(values, "Dataset: values");
}

Index FeatureRef::resolve(const Dataset& data) const {
  if (!name.empty()) return data.column(name);
  require(index >= 0 && index < data.n_features(),
          "FeatureRef: index out of range");
  return index;
}

EntrySpec EntrySpec::constant(double v) {
  EntrySpec e;
  e.kind = Kind::Constant;
  e.value = v;
  return e;
}

EntrySpec EntrySpec::mean(FeatureRef f) {
  EntrySpec e;
  e.kind = Kind::Mean;
  e.features = {std::move(f)};
  return e;
}

EntrySpec EntrySpec::smooth(const std::string& source,
                            std::vector<FeatureRef> features) {
  EntrySpec e;
  e.kind = Kind::Smooth;
  e.features = std::move(features);
  e.expr = Expr::parse(source, static_cast<Index>(e.features.size()));
  return e;
}

namespace {

void validate_grid(const std::vector<std::vector<EntrySpec>>& grid, Index p,
                   Index cols, const char* what) {
  require(static_cast<Index>(grid.size()) == p,
          std::string(what) + ": wrong row count");
  for (const auto& row : grid) {
    require(static_cast<Index>(row.size()) == cols,
            std::string(what) + ": ragged rows");
    for (const auto& e : row) {
      switch (e.kind) {
        case EntrySpec::Kind::Constant:
          require(std::isfinite(e.value), std::string(what) + ": non-finite constant");
          break;
        case EntrySpec::Kind::Mean:
          require(e.features.size() == 1, std::string(what) + ": MEAN needs one feature");
          break;
        case EntrySpec::Kind::Smooth:
          require(!e.expr.empty(), std::string(what) + ": SMOOTH without expression");
          break;
      }
    }
  }
}

bool column_constant(const MomentModel& m, Index j) {
  for (Index r = 0; r < m.p; ++r)
    if (m.b_entries[r][j].kind != EntrySpec::Kind::Constant) return false;
  return true;
}

bool a0_all_constant(const MomentModel& m) {
  for (const auto& row : m.a0_entries)
    for (const auto& e : row)
      if (e.kind != EntrySpec::Kind::Constant) return false;
  return true;
}

}  // namespace

void MomentModel::validate() const {
  require(p >= 1 && d1 >= 1 && d0 >= 0, "MomentModel: need p >= 1, d1 >= 1");
  if (d0 > 0) validate_grid(a0_entries, p, d0, "a0_entries");
  else require(a0_entries.empty(), "MomentModel: a0_entries present with d0 = 0");
  validate_grid(b_entries, p, d1 + 1, "b_entries");
  if (deterministic_override) {
    const std::vector<Index> derivable = derivable_deterministic_columns();
    for (Index j : *deterministic_override) {
      require(j >= 0 && j <= d1, "MomentModel: deterministic column out of range");
      bool ok = false;
      for (Index k : derivable) ok = ok || k == j;
      require(ok, "MomentModel: declared deterministic column " +
                      std::to_string(j + 1) + " has non-constant entries");
    }
  }
}

std::vector<Index> MomentModel::derivable_deterministic_columns() const {
  std::vector<Index> out;
  if (d0 > 0 && !a0_all_constant(*this)) return out;
  for (Index j = 0; j <= d1; ++j)
    if (column_constant(*this, j)) out.push_back(j);
  return out;
}

std::vector<Index> MomentModel::deterministic_columns() const {
  if (deterministic_override) return *deterministic_override;
  return derivable_deterministic_columns();
}

namespace {

// Estimate + influence column for one entry. means: full column means of
// the dataset; cols: dataset columns.
struct EntryEval {
  double value = 0.0;
  Vector influence;  // length n, exactly centered; empty means all-zero
};

EntryEval eval_entry(const EntrySpec& e, const Dataset& data,
                     const Vector& means, double null_value) {
  EntryEval out;
  switch (e.kind) {
    case EntrySpec::Kind::Constant: {
      out.value = e.value;
      return out;
    }
    case EntrySpec::Kind::Mean: {
      const Index k = e.features[0].resolve(data);
      out.value = means(k);
      out.influence = data.values.col(k).array() - means(k);
      return out;
    }
    case EntrySpec::Kind::Smooth: {
      const Index arity = static_cast<Index>(e.features.size());
      std::vector<Index> cols(arity);
      Vector m(arity);
      for (Index k = 0; k < arity; ++k) {
        cols[k] = e.features[k].resolve(data);
        m(k) = means(cols[k]);
      }
      out.value = e.expr.eval(m, null_value);
      if (!std::isfinite(out.value))
        throw std::invalid_argument(
            "estimate: SMOOTH entry '" + e.expr.source() +
            "' is non-finite at the sample base means");
      // Central differences with a relative step per coordinate.
      Vector grad(arity);
      Vector bumped = m;
      for (Index k = 0; k < arity; ++k) {
        const double h = 1e-6 * (1.0 + std::abs(m(k)));
        bumped(k) = m(k) + h;
        const double up = e.expr.eval(bumped, null_value);
        bumped(k) = m(k) - h;
        const double dn = e.expr.eval(bumped, null_value);
        bumped(k) = m(k);
        if (!std::isfinite(up) || !std::isfinite(dn))
          throw std::invalid_argument(
              "estimate: SMOOTH entry '" + e.expr.source() +
              "' is non-finite near the sample base means");
        grad(k) = (up - dn) / (2.0 * h);
      }
      out.influence = Vector::Zero(data.n());
      for (Index k = 0; k < arity; ++k)
        if (grad(k) != 0.0)
          out.influence += grad(k) * (data.values.col(cols[k]).array() - m(k)).matrix();
      return out;
    }
  }
  return out;
}

}  // namespace

EstimationResult estimate(const MomentModel& model, const Dataset& data,
                          double rank_tol) {
  model.validate();
  data.validate();
  require(data.n() >= 2, "estimate: need n >= 2");

  EstimationResult res;
  res.n = data.n();
  res.p = model.p;
  res.d0 = model.d0;
  res.d1 = model.d1;

  const Vector means =
      data.n_features() > 0 ? Vector(data.values.colwise().mean()) : Vector(0);

  if (model.d0 > 0) {
    Matrix a0(model.p, model.d0);
    res.psi = Matrix::Zero(res.n, model.p * model.d0);
    for (Index c = 0; c < model.d0; ++c) {
      for (Index r = 0; r < model.p; ++r) {
        EntryEval ev = eval_entry(model.a0_entries[r][c], data, means,
                                  model.null_value);
        a0(r, c) = ev.value;
        if (ev.influence.size() > 0) res.psi.col(c * model.p + r) = ev.influence;
      }
    }
    res.a0_hat = std::move(a0);
    res.a0_pinv = pseudoinverse(*res.a0_hat, rank_tol);
  } else {
    res.psi = Matrix::Zero(res.n, 0);
    res.a0_pinv = Matrix(0, model.p);
  }
  res.m0 = annihilator(res.a0_hat, model.p, rank_tol);

  res.b_hat.resize(model.d1 + 1);
  res.phi.resize(model.d1 + 1);
  for (Index j = 0; j <= model.d1; ++j) {
    res.b_hat[j] = Vector::Zero(model.p);
    res.phi[j] = Matrix::Zero(res.n, model.p);
    for (Index r = 0; r < model.p; ++r) {
      EntryEval ev = eval_entry(model.b_entries[r][j], data, means,
                                model.null_value);
      res.b_hat[j](r) = ev.value;
      if (ev.influence.size() > 0) res.phi[j].col(r) = ev.influence;
    }
  }
  return res;
}

Matrix covariance_vj(const EstimationResult& result, Index j) {
  require(j >= 0 && j <= result.d1, "covariance_vj: j out of range");
  require(result.n >= 2, "covariance_vj: need n >= 2");
  const Index k = result.psi.cols();
  Matrix stacked(result.n, k + result.p);
  stacked.leftCols(k) = result.psi;
  stacked.rightCols(result.p) = result.phi[j];
  Matrix v = (stacked.transpose() * stacked) / static_cast<double>(result.n);
  v = 0.5 * (v + v.transpose());
  return v;
}

Vector gradient_dj(const Matrix& m0, const Matrix& a0_pinv,
                   const Vector& b_hat_j, const Vector& y) {
  const Index p = m0.rows();
  require(b_hat_j.size() == p && y.size() == p,
          "gradient_dj: dimension mismatch");
  const Index d0 = a0_pinv.rows();
  if (d0 == 0) return m0 * y;
  Vector out(p * d0 + p);
  const Vector m0y = m0 * y;
  const Vector m0b = m0 * b_hat_j;
  const Vector ay = a0_pinv * y;
  const Vector ab = a0_pinv * b_hat_j;
  out.head(p * d0) = -(kron(ay, m0b) + kron(ab, m0y));
  out.tail(p) = m0y;
  return out;
}

Vector gradient_dj(const std::optional<Matrix>& a0_hat, const Vector& b_hat_j,
                   const Vector& y, double rank_tol) {
  const Index p = b_hat_j.size();
  if (!a0_hat) return y;
  const Matrix m0 = annihilator(a0_hat, p, rank_tol);
  const Matrix pinv = pseudoinverse(*a0_hat, rank_tol);
  return gradient_dj(m0, pinv, b_hat_j, y);
}

SigmaEstimate sigma_hat(const Matrix& vj, const Vector& dj, double sigma_floor) {
  require(vj.rows() == vj.cols() && vj.rows() == dj.size(),
          "sigma_hat: dimension mismatch");
  require(sigma_floor > 0.0, "sigma_hat: sigma_floor must be > 0");
  SigmaEstimate s;
  s.raw_variance = dj.dot(vj * dj);
  const double floor2 = sigma_floor * sigma_floor;
  s.truncated = s.raw_variance < floor2;
  s.sigma = std::sqrt(std::max(s.raw_variance, floor2));
  return s;
}

SigmaEstimate sigma_hat_from_samples(const EstimationResult& result, Index j,
                                     const Vector& dj, double sigma_floor) {
  require(j >= 0 && j <= result.d1, "sigma_hat_from_samples: j out of range");
  const Index k = result.psi.cols();
  require(dj.size() == k + result.p, "sigma_hat_from_samples: dj size mismatch");
  require(sigma_floor > 0.0, "sigma_hat_from_samples: sigma_floor must be > 0");
  Vector proj = result.phi[j] * dj.tail(result.p);
  if (k > 0) proj += result.psi * dj.head(k);
  SigmaEstimate s;
  s.raw_variance = proj.squaredNorm() / static_cast<double>(result.n);
  const double floor2 = sigma_floor * sigma_floor;
  s.truncated = s.raw_variance < floor2;
  s.sigma = std::sqrt(std::max(s.raw_variance, floor2));
  return s;
}

}  // namespace linsys
