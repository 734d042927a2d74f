#pragma once

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>
#include <string>

namespace linsys {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Numerical failure inside a solver (SVD non-convergence, simplex cycling,
// non-finite intermediate). Distinct from precondition violations, which
// throw std::invalid_argument.
class numeric_error : public std::runtime_error {
 public:
  explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

inline void require_finite(const Matrix& m, const std::string& name) {
  if (!m.allFinite()) throw std::invalid_argument(name + ": non-finite entry");
}

inline void require_finite(const Vector& v, const std::string& name) {
  if (!v.allFinite()) throw std::invalid_argument(name + ": non-finite entry");
}

}  // namespace linsys
