#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>

#include "qpoisson/error.hpp"

namespace qpoisson {

/// Discretized Dirichlet Poisson problem on (0,1)^d with N = 2^n grid
/// intervals per dimension. The unknowns are the N-1 interior points per
/// dimension; b holds the right-hand side in lexicographic order.
class PoissonSystem {
 public:
  PoissonSystem(int n, Eigen::VectorXd b, int d = 1);

  int n() const { return n_; }
  int d() const { return d_; }
  /// Grid intervals per dimension, N = 2^n.
  Eigen::Index grid() const { return Eigen::Index{1} << n_; }
  /// Interior points per dimension, N - 1.
  Eigen::Index dim() const { return grid() - 1; }
  /// Total number of unknowns, (N - 1)^d.
  Eigen::Index unknowns() const;
  double h() const { return std::ldexp(1.0, -n_); }
  const Eigen::VectorXd& b() const { return b_; }
  Eigen::VectorXd normalized_b() const { return b_.normalized(); }

 private:
  int n_;
  int d_;
  Eigen::VectorXd b_;
};

/// Closed-form spectral data of the 1D operator.
struct EigenData {
  Eigen::VectorXd lambdas;  // ascending
  Eigen::MatrixXd eigvecs;  // column j-1 holds u_j
  Eigen::VectorXd betas;    // <u_j, b/|b|>
  double kappa = 1.0;
};

/// Default cap on matrix entries materialized by build_matrix (2^26 doubles).
inline constexpr std::size_t kDefaultMatrixBudget = std::size_t{1} << 26;

/// (1/h^2) tridiag(-1, 2, -1) of size (2^n - 1).
template <typename Scalar = double>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> laplacian_1d(int n) {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index size = (Eigen::Index{1} << n) - 1;
  const Scalar inv_h2 = Scalar(std::ldexp(1.0, 2 * n));
  Mat a = Mat::Zero(size, size);
  for (Eigen::Index k = 0; k < size; ++k) {
    a(k, k) = Scalar(2) * inv_h2;
    if (k + 1 < size) {
      a(k, k + 1) = -inv_h2;
      a(k + 1, k) = -inv_h2;
    }
  }
  return a;
}

/// Full d-dimensional operator: Kronecker sum of d copies of the 1D matrix.
template <typename Scalar = double>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> build_matrix(
    const PoissonSystem& system, std::size_t max_entries = kDefaultMatrixBudget) {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const auto total = static_cast<std::size_t>(system.unknowns());
  if (total != 0 && total > max_entries / total) {
    throw ResourceError("build_matrix: " + std::to_string(total) + "x" + std::to_string(total) +
                        " operator exceeds the matrix budget of " + std::to_string(max_entries) +
                        " entries");
  }
  const Mat a1 = laplacian_1d<Scalar>(system.n());
  const Eigen::Index m = a1.rows();
  Mat result = a1;
  // A^(d) = A^(d-1) (x) I + I (x) A, built one dimension at a time.
  for (int dim = 1; dim < system.d(); ++dim) {
    const Eigen::Index prev = result.rows();
    Mat next = Mat::Zero(prev * m, prev * m);
    for (Eigen::Index r = 0; r < prev; ++r) {
      for (Eigen::Index c = 0; c < prev; ++c) {
        if (result(r, c) != Scalar(0)) {
          next.block(r * m, c * m, m, m).diagonal().array() += result(r, c);
        }
      }
      next.block(r * m, r * m, m, m) += a1;
    }
    result = std::move(next);
  }
  return result;
}

/// lambda_j = 4 N^2 sin^2(j pi / 2N), j = 1..N-1, ascending.
template <typename Scalar = double>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> closed_form_eigenvalues(int n) {
  const Eigen::Index big_n = Eigen::Index{1} << n;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> lambdas(big_n - 1);
  for (Eigen::Index j = 1; j < big_n; ++j) {
    const Scalar s = std::sin(Scalar(j) * std::numbers::pi_v<Scalar> / Scalar(2 * big_n));
    lambdas(j - 1) = Scalar(4) * Scalar(big_n) * Scalar(big_n) * s * s;
  }
  return lambdas;
}

/// u_j(k) = sqrt(2/N) sin(j pi k / N); column j-1 holds u_j.
template <typename Scalar = double>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> closed_form_eigenvectors(int n) {
  const Eigen::Index big_n = Eigen::Index{1} << n;
  const Scalar scale = std::sqrt(Scalar(2) / Scalar(big_n));
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> u(big_n - 1, big_n - 1);
  for (Eigen::Index j = 1; j < big_n; ++j) {
    for (Eigen::Index k = 1; k < big_n; ++k) {
      u(k - 1, j - 1) =
          scale * std::sin(Scalar(j * k) * std::numbers::pi_v<Scalar> / Scalar(big_n));
    }
  }
  return u;
}

/// Solves the symmetric tridiagonal system with constant diagonal `diag` and
/// off-diagonal `off` by forward elimination and back substitution.
template <typename Scalar, typename Derived>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> tridiagonal_solve(Scalar diag, Scalar off,
                                                            const Eigen::MatrixBase<Derived>& rhs) {
  const Eigen::Index size = rhs.size();
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> c(size);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> x(size);
  Scalar pivot = diag;
  x(0) = Scalar(rhs(0)) / pivot;
  c(0) = off / pivot;
  for (Eigen::Index k = 1; k < size; ++k) {
    pivot = diag - off * c(k - 1);
    c(k) = off / pivot;
    x(k) = (Scalar(rhs(k)) - off * x(k - 1)) / pivot;
  }
  for (Eigen::Index k = size - 2; k >= 0; --k) {
    x(k) -= c(k) * x(k + 1);
  }
  return x;
}

/// Closed-form eigenpairs and input overlaps (d = 1 only).
EigenData eigenpairs(const PoissonSystem& system);

/// A^{-1} b, normalized to unit length. Uses tridiagonal elimination for d = 1
/// and a dense Cholesky factorization of the Kronecker sum for d > 1.
Eigen::VectorXd exact_solve(const PoissonSystem& system);

/// Parses {"n": int, "d": int, "b": [floats]}; "d" defaults to 1.
PoissonSystem load_problem_json(const std::string& text);
PoissonSystem load_problem_file(const std::string& path);

}  // namespace qpoisson
