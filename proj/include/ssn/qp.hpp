#pragma once

// Nonnegative quadratic programs
//
//     minimize  1/2 x^T Q x + x^T b~ + c   subject to  x >= 0,
//
// solved through the piecewise linear system [Q - I] x+ + x = -b~, whose
// solution x* yields the minimizer (x*)+. Projection onto a simplicial cone
// A R^n_+ is the special case Q = A^T A, b~ = -A^T z, c = z^T z / 2.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "ssn/pwls.hpp"

namespace ssn {

class EquivalenceUnavailableError : public SingularMatrixError {
 public:
  using SingularMatrixError::SingularMatrixError;
};

template <typename Scalar>
struct QpProblem {
  Matrix<Scalar> Q;
  Vector<Scalar> b_tilde;
  Scalar c = Scalar(0);

  /// Builds a problem from possibly nonsymmetric Q; the objective only sees
  /// the symmetric part 1/2 (Q + Q^T).
  template <typename DerivedQ, typename DerivedB>
  static QpProblem make(const Eigen::MatrixBase<DerivedQ>& q,
                        const Eigen::MatrixBase<DerivedB>& b_tilde,
                        Scalar c = Scalar(0)) {
    QpProblem p;
    p.Q = Scalar(0.5) * (q + q.transpose());
    p.b_tilde = b_tilde;
    p.c = c;
    p.validate();
    return p;
  }

  Index size() const { return b_tilde.size(); }

  void validate() const {
    detail::require_square(Q, "QpProblem");
    if (Q.rows() != b_tilde.size()) {
      throw DimensionError("QpProblem: Q is " + std::to_string(Q.rows()) +
                           "x" + std::to_string(Q.cols()) + " but b_tilde has " +
                           std::to_string(b_tilde.size()) + " entries");
    }
    detail::require_finite(Q, "QpProblem.Q");
    detail::require_finite(b_tilde, "QpProblem.b_tilde");
    if (!std::isfinite(c)) throw DomainError("QpProblem.c: non-finite");
    const Scalar scale = Q.size() ? Q.cwiseAbs().maxCoeff() : Scalar(0);
    if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-12) * scale) {
      throw DomainError("QpProblem: Q is not symmetric");
    }
  }
};

/// Smallest eigenvalue > 0, checked with the Jacobi eigensolver.
template <typename Scalar>
bool is_positive_definite(const QpProblem<Scalar>& q) {
  const auto eig = sym_eig(q.Q);
  return eig.eigenvalues.size() > 0 &&
         eig.eigenvalues(eig.eigenvalues.size() - 1) > Scalar(0);
}

/// F(x) = [Q - I] x+ + x + b~.
template <typename Scalar>
Vector<Scalar> qp_residual(const QpProblem<Scalar>& q, const Vector<Scalar>& x) {
  if (x.size() != q.size()) {
    throw DimensionError("qp_residual: x has wrong length");
  }
  const Vector<Scalar> xp = x.cwiseMax(Scalar(0));
  return q.Q * xp - xp + x + q.b_tilde;
}

/// [Q - I] diag(s) + I. Column j is (Q - I) e_j + e_j = Q e_j where s_j = 1,
/// and e_j elsewhere.
template <typename Scalar>
Matrix<Scalar> qp_newton_matrix(const QpProblem<Scalar>& q, const SignPattern& s) {
  const Index n = q.size();
  Matrix<Scalar> m = Matrix<Scalar>::Identity(n, n);
  for (Index j = 0; j < n; ++j) {
    if (s[j]) m.col(j) = q.Q.col(j);
  }
  return m;
}

/// Iterates x_{k+1} = -([Q - I] P(x_k) + I)^-1 b~ from x0.
template <typename Scalar>
SolveReport<Scalar> qp_newton_solve(const QpProblem<Scalar>& q,
                                    const Vector<Scalar>& x0,
                                    const SolverOptions<Scalar>& opts = {}) {
  q.validate();
  if (x0.size() != q.size()) {
    throw DimensionError("qp_newton_solve: x0 has wrong length");
  }
  const Vector<Scalar> rhs = -q.b_tilde;
  auto step = [&q, &rhs](const SignPattern& s) -> std::optional<Vector<Scalar>> {
    const auto lu = lu_factor(qp_newton_matrix(q, s));
    if (lu.singular()) return std::nullopt;
    return lu.solve(rhs);
  };
  auto f = [&q](const Vector<Scalar>& x) { return qp_residual(q, x); };
  return detail::run_pattern_newton<Scalar>(
      x0, step, f, q.b_tilde.template lpNorm<Eigen::Infinity>(), opts);
}

/// Minimizer of the QP from a solution of the piecewise linear system.
template <typename Derived>
Vector<typename Derived::Scalar> recover_qp_solution(
    const Eigen::MatrixBase<Derived>& x_star) {
  return x_star.cwiseMax(typename Derived::Scalar(0));
}

template <typename Scalar>
struct KktResidual {
  Scalar primal_violation = 0;  // ||min(x, 0)||_inf
  Scalar dual_violation = 0;    // ||min(Qx + b~, 0)||_inf
  Scalar complementarity = 0;   // |<Qx + b~, x>|

  Scalar max() const {
    return std::max({primal_violation, dual_violation, complementarity});
  }
};

template <typename Scalar>
KktResidual<Scalar> kkt_residual(const QpProblem<Scalar>& q,
                                 const Vector<Scalar>& x) {
  if (x.size() != q.size()) {
    throw DimensionError("kkt_residual: x has wrong length");
  }
  const Vector<Scalar> g = q.Q * x + q.b_tilde;
  KktResidual<Scalar> r;
  r.primal_violation = (-x).cwiseMax(Scalar(0)).template lpNorm<Eigen::Infinity>();
  r.dual_violation = (-g).cwiseMax(Scalar(0)).template lpNorm<Eigen::Infinity>();
  r.complementarity = std::abs(g.dot(x));
  return r;
}

/// 1 + ||b~||_inf + ||Q||_inf; KKT tolerances are taken relative to this.
template <typename Scalar>
Scalar kkt_scale(const QpProblem<Scalar>& q) {
  const Scalar q_inf = q.Q.size() ? q.Q.cwiseAbs().rowwise().sum().maxCoeff()
                                  : Scalar(0);
  return Scalar(1) + q.b_tilde.template lpNorm<Eigen::Infinity>() + q_inf;
}

template <typename Scalar>
Scalar qp_objective(const QpProblem<Scalar>& q, const Vector<Scalar>& x) {
  if (x.size() != q.size()) {
    throw DimensionError("qp_objective: x has wrong length");
  }
  return Scalar(0.5) * x.dot(q.Q * x) + x.dot(q.b_tilde) + q.c;
}

/// max of ||y - Qx - b~||_inf, ||min(x,0)||_inf, ||min(y,0)||_inf, |<x,y>|.
template <typename Scalar>
Scalar lcp_residual(const QpProblem<Scalar>& q, const Vector<Scalar>& x,
                    const Vector<Scalar>& y) {
  if (x.size() != q.size() || y.size() != q.size()) {
    throw DimensionError("lcp_residual: vector length mismatch");
  }
  const Scalar eq = (y - q.Q * x - q.b_tilde).template lpNorm<Eigen::Infinity>();
  const Scalar xneg = (-x).cwiseMax(Scalar(0)).template lpNorm<Eigen::Infinity>();
  const Scalar yneg = (-y).cwiseMax(Scalar(0)).template lpNorm<Eigen::Infinity>();
  return std::max({eq, xneg, yneg, std::abs(x.dot(y))});
}

/// T = [Q - I]^-1, b = -T b~. Throws EquivalenceUnavailableError when Q has
/// eigenvalue 1.
template <typename Scalar>
PwlsProblem<Scalar> qp_to_pwls(const QpProblem<Scalar>& q) {
  q.validate();
  const Index n = q.size();
  const auto lu = lu_factor(q.Q - Matrix<Scalar>::Identity(n, n));
  if (lu.singular()) {
    throw EquivalenceUnavailableError("qp_to_pwls: Q - I is singular");
  }
  PwlsProblem<Scalar> p;
  p.T.resize(n, n);
  for (Index j = 0; j < n; ++j) p.T.col(j) = lu.solve(Vector<Scalar>::Unit(n, j));
  p.b = -(p.T * q.b_tilde);
  return p;
}

template <typename Scalar>
struct ConeInstance {
  Matrix<Scalar> A;
  Vector<Scalar> z;

  Index size() const { return z.size(); }

  void validate() const {
    detail::require_square(A, "ConeInstance");
    if (A.rows() != z.size()) {
      throw DimensionError("ConeInstance: A and z sizes differ");
    }
    detail::require_finite(A, "ConeInstance.A");
    detail::require_finite(z, "ConeInstance.z");
    if (lu_factor(A).singular()) {
      throw SingularMatrixError("ConeInstance: A is singular");
    }
  }
};

/// Q = A^T A, b~ = -A^T z, c = z^T z / 2.
template <typename Scalar>
QpProblem<Scalar> cone_qp(const ConeInstance<Scalar>& ci) {
  ci.validate();
  QpProblem<Scalar> q;
  q.Q = ci.A.transpose() * ci.A;
  q.Q = (Scalar(0.5) * (q.Q + q.Q.transpose())).eval();
  q.b_tilde = -(ci.A.transpose() * ci.z);
  q.c = Scalar(0.5) * ci.z.squaredNorm();
  return q;
}

template <typename Scalar>
struct ConeProjection {
  Vector<Scalar> v;           // coefficients: projection = A v, v >= 0
  Vector<Scalar> projection;
  SolveReport<Scalar> report;
  KktResidual<Scalar> kkt;
};

/// Projects z onto A R^n_+. Uses opts' stopping rule; start defaults to 0.
template <typename Scalar>
ConeProjection<Scalar> cone_projection(
    const ConeInstance<Scalar>& ci, const SolverOptions<Scalar>& opts = {},
    const std::optional<Vector<Scalar>>& start = std::nullopt) {
  const QpProblem<Scalar> q = cone_qp(ci);
  const Vector<Scalar> x0 = start ? *start : Vector<Scalar>::Zero(q.size());
  ConeProjection<Scalar> out;
  out.report = qp_newton_solve(q, x0, opts);
  out.v = recover_qp_solution(out.report.last_iterate);
  out.projection = ci.A * out.v;
  out.kkt = kkt_residual(q, out.v);
  return out;
}

}  // namespace ssn
