#pragma once

// Test-only builders and oracles. Norms here go through Eigen's SVD so they
// stay independent of the power iteration under test.

#include <Eigen/SVD>

#include <cmath>
#include <random>

#include "ssn/gen.hpp"
#include "ssn/pwls.hpp"
#include "ssn/qp.hpp"

namespace ssn::testing {

inline double svd_norm(const MatrixXd& m) {
  return Eigen::JacobiSVD<MatrixXd>(m).singularValues()(0);
}

inline double svd_min_singular(const MatrixXd& m) {
  const auto sv = Eigen::JacobiSVD<MatrixXd>(m).singularValues();
  return sv(sv.size() - 1);
}

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Index uniform_int(Rng& rng, Index lo, Index hi) {
  return std::uniform_int_distribution<Index>(lo, hi)(rng);
}

/// Random well-conditioned square matrix: orthogonal * diag(s) * orthogonal
/// with singular values in [1, cond].
inline MatrixXd random_conditioned(Index n, double cond, Rng& rng) {
  const MatrixXd a = random_matrix(n, n, 1.0, rng);
  const MatrixXd b = random_matrix(n, n, 1.0, rng);
  const MatrixXd u = Eigen::HouseholderQR<MatrixXd>(a).householderQ();
  const MatrixXd v = Eigen::HouseholderQR<MatrixXd>(b).householderQ();
  VectorXd s(n);
  for (Index i = 0; i < n; ++i) {
    s(i) = n == 1 ? 1.0 : std::pow(cond, static_cast<double>(i) / (n - 1));
  }
  return u * s.asDiagonal() * v.transpose();
}

/// T with ||T^-1|| = lambda exactly (up to SVD accuracy).
inline MatrixXd random_T_with_inv_norm(Index n, double lambda, Rng& rng) {
  MatrixXd g = random_conditioned(n, uniform(rng, 1.0, 20.0), rng);
  const double inv_norm = 1.0 / svd_min_singular(g);
  return g * (inv_norm / lambda);
}

struct Planted {
  PwlsProblem<double> problem;
  VectorXd solution;
};

/// Problem whose b is built from a chosen solution: b = x*+ + T x*.
inline Planted planted_pwls(const MatrixXd& t, Rng& rng, double bound = 10.0) {
  const VectorXd xs = random_vector(t.rows(), bound, rng);
  return {PwlsProblem<double>{t, xs.cwiseMax(0.0) + t * xs}, xs};
}

/// Random SPD Q with ||Q - I|| = beta, built without the generator under test.
inline MatrixXd random_spd_near_identity(Index n, double beta, Rng& rng) {
  const MatrixXd a = random_matrix(n, n, 1.0, rng);
  const MatrixXd u = Eigen::HouseholderQR<MatrixXd>(a).householderQ();
  VectorXd d(n);
  for (Index i = 0; i < n; ++i) d(i) = uniform(rng, -beta, beta);
  d(uniform_int(rng, 0, n - 1)) = (uniform(rng, 0, 1) < 0.5 ? -beta : beta);
  MatrixXd q = u * (VectorXd::Ones(n) + d).asDiagonal() * u.transpose();
  return 0.5 * (q + q.transpose());
}

inline MatrixXd random_spd(Index n, Rng& rng) {
  const MatrixXd b = random_matrix(n, n, 1.0, rng);
  return b.transpose() * b + 1e-3 * MatrixXd::Identity(n, n);
}

inline SignPattern random_pattern(Index n, Rng& rng) {
  std::vector<bool> bits(static_cast<std::size_t>(n));
  std::bernoulli_distribution coin(0.5);
  for (auto&& bit : bits) bit = coin(rng);
  return SignPattern(std::move(bits));
}

inline double inf_norm(const VectorXd& v) { return v.lpNorm<Eigen::Infinity>(); }

}  // namespace ssn::testing
