#pragma once

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <concepts>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "puflearn/errors.hpp"
#include "puflearn/types.hpp"

namespace puflearn {

/// Dense real symmetric matrix. Construction symmetrizes as (A + A^T)/2, so
/// entries(i,j) == entries(j,i) holds exactly afterwards.
template <std::floating_point T>
class SymMatrix {
 public:
  explicit SymMatrix(const Mat<T>& a) {
    if (a.rows() != a.cols())
      throw DimensionMismatch("SymMatrix: input is " + std::to_string(a.rows()) + "x" +
                              std::to_string(a.cols()) + ", expected square");
    if (!a.allFinite()) throw InvalidArgument("SymMatrix: non-finite entries");
    m_ = ((a + a.transpose()) / T(2)).eval();
  }

  Index dim() const { return m_.rows(); }
  const Mat<T>& matrix() const { return m_; }
  T operator()(Index i, Index j) const { return m_(i, j); }

 private:
  Mat<T> m_;
};

/// Spectral factorization A = P diag(lambda) P^T with eigenvalues sorted
/// descending and orthonormal eigenvector columns.
template <std::floating_point T>
struct EigenDecomposition {
  Vec<T> eigenvalues;
  Mat<T> vectors;

  T lambda_max() const { return eigenvalues(0); }
  T lambda_min() const { return eigenvalues(eigenvalues.size() - 1); }
};

namespace detail {

// One Jacobi rotation zeroing a(p,q); updates a (symmetric storage, both
// triangles) and accumulates the rotation into v.
template <std::floating_point T>
void jacobi_rotate(Mat<T>& a, Mat<T>& v, Index p, Index q) {
  const T apq = a(p, q);
  const T theta = (a(q, q) - a(p, p)) / (2 * apq);
  T t;
  if (std::abs(theta) > T(1) / std::sqrt(std::numeric_limits<T>::epsilon())) {
    t = 1 / (2 * theta);  // avoids theta^2 overflow; exact to working precision
  } else {
    t = T(1) / (std::abs(theta) + std::sqrt(theta * theta + 1));
    if (theta < 0) t = -t;
  }
  const T c = T(1) / std::sqrt(t * t + 1);
  const T s = t * c;
  const T tau = s / (1 + c);
  const Index n = a.rows();

  a(p, p) -= t * apq;
  a(q, q) += t * apq;
  a(p, q) = a(q, p) = T(0);
  for (Index k = 0; k < n; ++k) {
    if (k == p || k == q) continue;
    const T akp = a(k, p);
    const T akq = a(k, q);
    a(k, p) = a(p, k) = akp - s * (akq + tau * akp);
    a(k, q) = a(q, k) = akq + s * (akp - tau * akq);
  }
  for (Index k = 0; k < n; ++k) {
    const T vkp = v(k, p);
    const T vkq = v(k, q);
    v(k, p) = vkp - s * (vkq + tau * vkp);
    v(k, q) = vkq + s * (vkp - tau * vkq);
  }
}

template <std::floating_point T>
T offdiag_norm(const Mat<T>& a) {
  T sum = 0;
  for (Index p = 0; p < a.rows(); ++p)
    for (Index q = p + 1; q < a.cols(); ++q) sum += a(p, q) * a(p, q);
  return std::sqrt(2 * sum);
}

}  // namespace detail

/// Symmetric eigendecomposition by cyclic Jacobi sweeps. Unconditionally
/// convergent for symmetric input; capped at 100 sweeps, throwing
/// EigNonConvergence if the off-diagonal mass has not collapsed by then.
template <std::floating_point T>
EigenDecomposition<T> sym_eig(const SymMatrix<T>& A) {
  constexpr int kMaxSweeps = 100;
  const Index n = A.dim();
  Mat<T> a = A.matrix();
  Mat<T> v = Mat<T>::Identity(n, n);

  const T scale = a.norm();
  const T stop = 4 * std::numeric_limits<T>::epsilon() * scale;
  int sweep = 0;
  if (n > 1 && scale > T(0)) {
    for (; sweep < kMaxSweeps; ++sweep) {
      if (detail::offdiag_norm(a) <= stop) break;
      for (Index p = 0; p < n - 1; ++p)
        for (Index q = p + 1; q < n; ++q)
          if (std::abs(a(p, q)) > std::numeric_limits<T>::min())
            detail::jacobi_rotate(a, v, p, q);
    }
    if (sweep == kMaxSweeps && detail::offdiag_norm(a) > stop)
      throw EigNonConvergence(
          "sym_eig: Jacobi iteration did not converge after " + std::to_string(kMaxSweeps) +
              " sweeps (dim " + std::to_string(n) + ")",
          kMaxSweeps);
  }

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index i, Index j) { return a(i, i) > a(j, j); });

  EigenDecomposition<T> out;
  out.eigenvalues.resize(n);
  out.vectors.resize(n, n);
  for (Index k = 0; k < n; ++k) {
    out.eigenvalues(k) = a(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(k)]);
    out.vectors.col(k) = v.col(order[static_cast<std::size_t>(k)]);
  }
  return out;
}

/// Cholesky-backed solver for symmetric positive definite systems. One
/// factorization serves any number of right-hand sides; solve() applies a
/// single iterative-refinement pass.
template <std::floating_point T>
class SpdSolver {
 public:
  explicit SpdSolver(const SymMatrix<T>& A) : a_(A.matrix()) {
    llt_.compute(a_);
    const T rcond_floor = static_cast<T>(a_.rows()) * std::numeric_limits<T>::epsilon();
    if (llt_.info() != Eigen::Success || llt_.rcond() < rcond_floor) {
      const T lmin = sym_eig(A).lambda_min();
      throw NotPositiveDefinite(
          "spd_solve: matrix is not positive definite to working precision "
          "(lambda_min estimate " +
              std::to_string(lmin) + ", dim " + std::to_string(a_.rows()) + ")",
          static_cast<double>(lmin));
    }
  }

  Mat<T> solve(const Mat<T>& b) const {
    if (b.rows() != a_.rows())
      throw DimensionMismatch("spd_solve: rhs has " + std::to_string(b.rows()) +
                              " rows, matrix has " + std::to_string(a_.rows()));
    Mat<T> x = llt_.solve(b);
    x += llt_.solve(b - a_ * x);
    return x;
  }

  const Mat<T>& matrix() const { return a_; }

 private:
  Mat<T> a_;
  Eigen::LLT<Mat<T>> llt_;
};

template <std::floating_point T>
Mat<T> spd_solve(const SymMatrix<T>& A, const Mat<T>& b) {
  return SpdSolver<T>(A).solve(b);
}

/// Scale-relative cutoff under which callers treat an eigenvalue as zero:
/// lambda <= dim * 1e-12 * max(lambda_max, 1).
template <std::floating_point T>
bool negligible_eigenvalue(T lambda, Index dim, T lambda_max) {
  return lambda <= static_cast<T>(dim) * T(1e-12) * std::max(lambda_max, T(1));
}

/// Operator (spectral) norm: sqrt of the largest eigenvalue of A A^T,
/// i.e. the largest singular value. Zero exactly when A is zero.
template <std::floating_point T>
T operator_norm(const Mat<T>& a) {
  if (!a.allFinite()) throw InvalidArgument("operator_norm: non-finite entries");
  if (a.size() == 0 || a.isZero(T(0))) return T(0);
  // Gram matrix on the smaller side; the nonzero spectrum is the same.
  Mat<T> g;
  if (a.rows() <= a.cols())
    g = a * a.transpose();
  else
    g = a.transpose() * a;
  const auto eig = sym_eig(SymMatrix<T>(g));
  return std::sqrt(std::max(eig.lambda_max(), T(0)));
}

using SymMatrixd = SymMatrix<double>;
using EigenDecompositiond = EigenDecomposition<double>;
using SpdSolverd = SpdSolver<double>;

}  // namespace puflearn
