#pragma once

// Dense real kernels shared by the solvers: LU with partial pivoting and a
// scale-aware singularity flag, power-iteration norms, and cyclic Jacobi for
// symmetric eigenproblems.

#include <Eigen/Dense>
#include <Eigen/Jacobi>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "ssn/errors.hpp"

namespace ssn {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixXd = Matrix<double>;
using VectorXd = Vector<double>;
using Index = Eigen::Index;

/// Relative pivot magnitude below which a factorization is flagged singular.
inline constexpr double kSingularPivotRatio = 1e-12;

namespace detail {

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& m, const char* what) {
  if (!m.allFinite()) {
    throw DomainError(std::string(what) + ": non-finite entry");
  }
}

template <typename Derived>
void require_square(const Eigen::MatrixBase<Derived>& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw DimensionError(std::string(what) + ": matrix is " +
                         std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()) + ", expected square");
  }
}

}  // namespace detail

/// PM = LU, stored compactly. A factorization flagged singular refuses to
/// solve.
template <typename Scalar>
class LuFactors {
 public:
  LuFactors() = default;

  Index size() const { return lu_.rows(); }
  bool singular() const { return singular_; }

  /// Unit-lower L below the diagonal, U on and above it.
  const Matrix<Scalar>& combined() const { return lu_.matrixLU(); }

  /// perm[i] = row of M that ended up in row i of PM.
  std::vector<Index> permutation() const {
    const auto& p = lu_.permutationP().indices();
    std::vector<Index> perm(p.size());
    for (Index i = 0; i < p.size(); ++i) perm[p(i)] = i;
    return perm;
  }

  /// Smallest |U_ii|; the quantity compared against the singularity threshold.
  Scalar min_pivot() const { return min_pivot_; }

  template <typename Derived>
  Vector<Scalar> solve(const Eigen::MatrixBase<Derived>& rhs) const {
    check(rhs.rows());
    return lu_.solve(rhs);
  }

  /// Solves M^T x = rhs with the same factors.
  template <typename Derived>
  Vector<Scalar> solve_transposed(const Eigen::MatrixBase<Derived>& rhs) const {
    check(rhs.rows());
    return lu_.transpose().solve(rhs);
  }

 private:
  template <typename Derived>
  friend LuFactors<typename Derived::Scalar> lu_factor(
      const Eigen::MatrixBase<Derived>& m);

  void check(Index rhs_rows) const {
    if (singular_) throw SingularMatrixError("lu_solve: singular factors");
    if (rhs_rows != size()) {
      throw DimensionError("lu_solve: rhs has " + std::to_string(rhs_rows) +
                           " rows, factors are " + std::to_string(size()));
    }
  }

  Eigen::PartialPivLU<Matrix<Scalar>> lu_;
  Scalar min_pivot_ = Scalar(0);
  bool singular_ = true;
};

template <typename Derived>
LuFactors<typename Derived::Scalar> lu_factor(
    const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  detail::require_square(m, "lu_factor");
  detail::require_finite(m, "lu_factor");
  if (m.rows() == 0) throw DimensionError("lu_factor: empty matrix");
  LuFactors<Scalar> f;
  f.lu_.compute(m);
  const Scalar scale = m.cwiseAbs().maxCoeff();
  f.min_pivot_ = f.lu_.matrixLU().diagonal().cwiseAbs().minCoeff();
  f.singular_ = f.min_pivot_ == Scalar(0) ||
                f.min_pivot_ < Scalar(kSingularPivotRatio) * scale;
  return f;
}

template <typename Scalar, typename Derived>
Vector<Scalar> lu_solve(const LuFactors<Scalar>& f,
                        const Eigen::MatrixBase<Derived>& rhs) {
  return f.solve(rhs);
}

struct PowerIterationOptions {
  double tol = 1e-10;
  int max_iter = 10000;
};

namespace detail {

template <typename Scalar>
Vector<Scalar> jittered_ones(Index n) {
  Vector<Scalar> v(n);
  for (Index i = 0; i < n; ++i) {
    v(i) = Scalar(1) + Scalar(0.25) * std::sin(Scalar(1.618034) * Scalar(i + 1));
  }
  return v.normalized();
}

// Largest eigenvalue of a symmetric positive semidefinite operator.
template <typename Scalar, typename Apply>
Scalar dominant_psd_eigenvalue(Index n, Apply&& apply,
                               const PowerIterationOptions& opts) {
  if (!(opts.tol > 0)) throw DomainError("power iteration: tol must be > 0");
  if (n == 0) return Scalar(0);
  Vector<Scalar> v = jittered_ones<Scalar>(n);
  Scalar rho_prev = Scalar(0);
  for (int it = 0; it < opts.max_iter; ++it) {
    Vector<Scalar> w = apply(v);
    const Scalar rho = v.dot(w);
    const Scalar w_norm = w.norm();
    if (w_norm == Scalar(0)) return Scalar(0);
    if (it > 0 && std::abs(rho - rho_prev) <= Scalar(opts.tol) * std::abs(rho)) {
      return rho;
    }
    rho_prev = rho;
    v = w / w_norm;
  }
  throw IterationLimitError("power iteration did not converge in " +
                            std::to_string(opts.max_iter) + " iterations");
}

}  // namespace detail

/// Largest singular value, by power iteration on M^T M.
template <typename Derived>
typename Derived::Scalar spectral_norm(const Eigen::MatrixBase<Derived>& m,
                                       const PowerIterationOptions& opts = {}) {
  using Scalar = typename Derived::Scalar;
  detail::require_finite(m, "spectral_norm");
  const Matrix<Scalar> a = m;
  const Scalar lambda = detail::dominant_psd_eigenvalue<Scalar>(
      a.cols(),
      [&a](const Vector<Scalar>& v) -> Vector<Scalar> {
        return a.transpose() * (a * v);
      },
      opts);
  return std::sqrt(std::max(lambda, Scalar(0)));
}

template <typename Derived>
typename Derived::Scalar spectral_norm(const Eigen::MatrixBase<Derived>& m,
                                       double tol, int max_iter) {
  return spectral_norm(m, PowerIterationOptions{tol, max_iter});
}

/// ||F^-1|| from existing nonsingular factors; M^-1 is never formed.
template <typename Scalar>
Scalar inv_spectral_norm(const LuFactors<Scalar>& f,
                         const PowerIterationOptions& opts = {}) {
  if (f.singular()) {
    throw SingularMatrixError("inv_spectral_norm: matrix is singular");
  }
  const Scalar lambda = detail::dominant_psd_eigenvalue<Scalar>(
      f.size(),
      [&f](const Vector<Scalar>& v) -> Vector<Scalar> {
        return f.solve_transposed(f.solve(v));
      },
      opts);
  return std::sqrt(std::max(lambda, Scalar(0)));
}

template <typename Derived>
typename Derived::Scalar inv_spectral_norm(
    const Eigen::MatrixBase<Derived>& m,
    const PowerIterationOptions& opts = {}) {
  return inv_spectral_norm(lu_factor(m), opts);
}

template <typename Scalar>
struct SymEig {
  Vector<Scalar> eigenvalues;   // descending
  Matrix<Scalar> eigenvectors;  // orthonormal columns, matching order
};

/// Cyclic-by-row Jacobi: S = W diag(eigenvalues) W^T.
template <typename Derived>
SymEig<typename Derived::Scalar> sym_eig(const Eigen::MatrixBase<Derived>& s_in) {
  using Scalar = typename Derived::Scalar;
  detail::require_square(s_in, "sym_eig");
  detail::require_finite(s_in, "sym_eig");
  const Index n = s_in.rows();
  Matrix<Scalar> s = s_in;
  const Scalar max_abs = n > 0 ? s.cwiseAbs().maxCoeff() : Scalar(0);
  if ((s - s.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-12) * max_abs) {
    throw DomainError("sym_eig: matrix is not symmetric");
  }
  s = Scalar(0.5) * (s + s.transpose()).eval();

  Matrix<Scalar> w = Matrix<Scalar>::Identity(n, n);
  const Scalar stop = Scalar(1e-12) * s.norm();
  constexpr int kMaxSweeps = 30;

  auto off_diagonal_norm = [&s, n] {
    Scalar sum = 0;
    for (Index j = 1; j < n; ++j) sum += s.col(j).head(j).squaredNorm();
    return std::sqrt(Scalar(2) * sum);
  };

  for (int sweep = 0; sweep < kMaxSweeps && off_diagonal_norm() > stop; ++sweep) {
    for (Index p = 0; p < n - 1; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        Eigen::JacobiRotation<Scalar> rot;
        if (!rot.makeJacobi(s, p, q)) continue;
        s.applyOnTheLeft(p, q, rot.adjoint());
        s.applyOnTheRight(p, q, rot);
        w.applyOnTheRight(p, q, rot);
        s(p, q) = s(q, p) = Scalar(0);
      }
    }
  }

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&s](Index a, Index b) { return s(a, a) > s(b, b); });
  SymEig<Scalar> out{Vector<Scalar>(n), Matrix<Scalar>(n, n)};
  for (Index k = 0; k < n; ++k) {
    out.eigenvalues(k) = s(order[k], order[k]);
    out.eigenvectors.col(k) = w.col(order[k]);
  }
  return out;
}

}  // namespace ssn
