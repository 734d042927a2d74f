#pragma once

#include <optional>
#include <string>
#include <vector>

#include "linsys/expr.hpp"
#include "linsys/linalg.hpp"
#include "linsys/types.hpp"

namespace linsys {

// Observation table: one row per observation, named feature columns.
struct Dataset {
  std::vector<std::string> feature_names;
  Matrix values;  // n x n_features

  Index n() const { return values.rows(); }
  Index n_features() const { return values.cols(); }
  Index column(const std::string& name) const;  // throws if unknown
  Dataset rows(const std::vector<Index>& idx) const;
  void validate() const;
};

// Feature reference: by name when name is nonempty, else by column index.
struct FeatureRef {
  std::string name;
  Index index = -1;

  FeatureRef() = default;
  FeatureRef(std::string n) : name(std::move(n)) {}  // NOLINT(google-explicit-constructor)
  FeatureRef(Index i) : index(i) {}                  // NOLINT(google-explicit-constructor)
  Index resolve(const Dataset& data) const;
};

// One scalar entry of A0 or of a b_j column: a known constant, a sample
// mean of one feature, or a smooth function of several feature means
// (delta method with a finite-difference gradient).
struct EntrySpec {
  enum class Kind { Constant, Mean, Smooth };
  Kind kind = Kind::Constant;
  double value = 0.0;                // Constant
  std::vector<FeatureRef> features;  // Mean: exactly one; Smooth: arity
  Expr expr;                         // Smooth; may reference v

  static EntrySpec constant(double v);
  static EntrySpec mean(FeatureRef f);
  static EntrySpec smooth(const std::string& source, std::vector<FeatureRef> features);
};

// Declarative model of (A0(P), b_1..b_{d1+1}(P)) where b_j = a_j for
// j <= d1 and the last column carries -beta. null_value binds the symbol v
// inside Smooth expressions, so one model template serves a family indexed
// by the hypothesized value.
struct MomentModel {
  Index p = 0, d0 = 0, d1 = 0;
  std::vector<std::vector<EntrySpec>> a0_entries;  // p x d0, empty when d0 = 0
  std::vector<std::vector<EntrySpec>> b_entries;   // p x (d1+1)
  // Explicit override of the derivable deterministic column set (0-based j).
  std::optional<std::vector<Index>> deterministic_override;
  double null_value = 0.0;

  void validate() const;
  // Columns j whose b_j' M0 is known exactly: all entries of column j are
  // Constant and a0 is absent or all-Constant. The override, when present,
  // wins (validated to be a subset of the derivable set).
  std::vector<Index> deterministic_columns() const;
  std::vector<Index> derivable_deterministic_columns() const;
};

struct EstimationResult {
  std::optional<Matrix> a0_hat;  // p x d0
  std::vector<Vector> b_hat;     // d1+1 vectors of length p
  // Influence samples: psi row i is vec(Psi_i)' (column-major), phi[j] row
  // i is phi_{j,i}'. Exactly centered by construction.
  Matrix psi;               // n x (p*d0)
  std::vector<Matrix> phi;  // (d1+1) of n x p
  Index n = 0, p = 0, d0 = 0, d1 = 0;
  // Caches derived from a0_hat.
  Matrix m0;       // p x p annihilator
  Matrix a0_pinv;  // d0 x p, empty when d0 = 0
};

struct SigmaEstimate {
  double sigma = 0.0;         // sqrt(max(raw_variance, floor^2))
  double raw_variance = 0.0;  // D' V D
  bool truncated = false;
};

inline constexpr double kDefaultSigmaFloor = 1e-6;

EstimationResult estimate(const MomentModel& model, const Dataset& data,
                          double rank_tol = kDefaultRankTol);

// Sample covariance (divisor n) of the stacked samples (vec Psi_i, phi_{j,i}).
Matrix covariance_vj(const EstimationResult& result, Index j);

// Stacked gradient (-(A0^+ y (x) M0 b_j + A0^+ b_j (x) M0 y), M0 y) of the
// map (A0, b_j) |-> b_j' M(A0) y at the plug-ins. a0 absent: just y.
Vector gradient_dj(const std::optional<Matrix>& a0_hat, const Vector& b_hat_j,
                   const Vector& y, double rank_tol = kDefaultRankTol);
Vector gradient_dj(const Matrix& m0, const Matrix& a0_pinv,
                   const Vector& b_hat_j, const Vector& y);

SigmaEstimate sigma_hat(const Matrix& vj, const Vector& dj, double sigma_floor);

// Same quadratic form as sigma_hat(covariance_vj(...), dj, floor) computed
// from the samples directly, without materializing V_j.
SigmaEstimate sigma_hat_from_samples(const EstimationResult& result, Index j,
                                     const Vector& dj, double sigma_floor);

}  // namespace linsys
