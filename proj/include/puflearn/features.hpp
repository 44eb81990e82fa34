#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "puflearn/errors.hpp"
#include "puflearn/types.hpp"

namespace puflearn {

/// Number of monomials in N variables of total degree at most D, the
/// constant term included: binomial(N+D, D). Throws OverflowError if the
/// count does not fit a 64-bit signed integer.
std::int64_t feature_dim(int n_vars, int max_degree);

/// Ordered table of exponent multi-indices for all monomials in n_vars
/// variables up to total degree max_degree. Order is graded lexicographic:
/// ascending total degree, and within a degree the order induced by
/// enumerating sorted variable tuples (b0^2 before b0*b1 before b1^2).
/// Row 0 is the all-zero multi-index (the constant term). The ordering is
/// deterministic across runs and processes.
class MonomialBasis {
 public:
  /// Empty basis; placeholder until a real one is assigned.
  MonomialBasis() = default;
  MonomialBasis(int n_vars, int max_degree);

  int n_vars() const { return n_vars_; }
  int max_degree() const { return max_degree_; }
  Index size() const { return exponents_.rows(); }

  /// size() x n_vars() matrix of exponents, canonical order.
  const Eigen::MatrixXi& exponents() const { return exponents_; }
  int degree_of(Index term) const { return degrees_[static_cast<std::size_t>(term)]; }

  /// Position of a multi-index in the canonical order, if present.
  std::optional<Index> index_of(const std::vector<int>& exponent) const;

  /// For term i >= 1, exponents.row(i) == exponents.row(parent(i)) + e_{var(i)}.
  /// This factorization lets expand() run in one multiply per term.
  Index parent(Index term) const { return parents_[static_cast<std::size_t>(term)]; }
  int var(Index term) const { return vars_[static_cast<std::size_t>(term)]; }

  bool operator==(const MonomialBasis& other) const {
    return n_vars_ == other.n_vars_ && max_degree_ == other.max_degree_;
  }

  /// JSON array of exponent arrays, canonical order.
  std::string to_json() const;
  /// Parses and validates against the canonical construction.
  static MonomialBasis from_json(const std::string& text);

 private:
  int n_vars_ = 0;
  int max_degree_ = 0;
  Eigen::MatrixXi exponents_;
  std::vector<int> degrees_;
  std::vector<Index> parents_;
  std::vector<int> vars_;
  std::map<std::vector<int>, Index> lookup_;
};

/// Monomial feature expansion of a challenge: c[i] = prod_j b[j]^e[i][j],
/// with c[0] == 1. Every entry lies in [0,1] whenever b does.
template <std::floating_point T>
Vec<T> expand(const MonomialBasis& basis, const Vec<T>& b) {
  if (b.size() != basis.n_vars())
    throw DimensionMismatch("expand: challenge has " + std::to_string(b.size()) +
                            " entries, basis expects " + std::to_string(basis.n_vars()));
  Vec<T> c(basis.size());
  c(0) = T(1);
  for (Index i = 1; i < basis.size(); ++i) c(i) = b(basis.var(i)) * c(basis.parent(i));
  return c;
}

using FeatureVector = Vecd;

}  // namespace puflearn
