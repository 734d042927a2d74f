#pragma once

#include <memory>
#include <string>

#include "linsys/types.hpp"

namespace linsys {

// Arithmetic over a vector of base means: +, -, *, /, ^ (right-assoc),
// unary +/-, parentheses, decimal literals, m[k] for the k-th mean, and v
// for an externally bound scalar (the hypothesized value in a model
// family). Parsed once, evaluated many times.
class Expr {
 public:
  Expr() = default;

  // Throws std::invalid_argument with a character position on bad syntax
  // or an m[k] index outside [0, arity).
  static Expr parse(const std::string& source, Index arity);

  double eval(const Vector& means, double v = 0.0) const;
  bool uses_v() const;
  const std::string& source() const { return source_; }
  bool empty() const { return node_ == nullptr; }

  struct Node;

 private:
  std::shared_ptr<const Node> node_;
  std::string source_;
};

}  // namespace linsys
