#include "ssn/gen.hpp"

#include <cmath>
#include <string>

namespace ssn {

namespace {

constexpr int kMaxSingularDraws = 10;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

void GeneratorConfig::validate() const {
  if (n < 1) throw DomainError("GeneratorConfig: n must be >= 1");
  if (!(beta_low >= 0.0) || !(beta_high > beta_low) || !std::isfinite(beta_high)) {
    throw DomainError("GeneratorConfig: need 0 <= beta_low < beta_high, got [" +
                      std::to_string(beta_low) + ", " +
                      std::to_string(beta_high) + ")");
  }
  if (!(value_bound > 0.0) || !std::isfinite(value_bound)) {
    throw DomainError("GeneratorConfig: value_bound must be > 0");
  }
}

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

VectorXd random_vector(Index n, double bound, Rng& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  VectorXd v(n);
  for (Index i = 0; i < n; ++i) v(i) = dist(rng);
  return v;
}

MatrixXd random_matrix(Index rows, Index cols, double bound, Rng& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  MatrixXd m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = dist(rng);
  }
  return m;
}

MatrixXd make_spd_matrix(Index n, double beta, Rng& rng, double value_bound) {
  if (n < 1) throw DomainError("make_spd_matrix: n must be >= 1");
  if (!(beta > 0.0)) throw DomainError("make_spd_matrix: beta must be > 0");

  MatrixXd b;
  int draws = 0;
  do {
    if (draws++ == kMaxSingularDraws) {
      throw GeneratorError("make_spd_matrix: " +
                           std::to_string(kMaxSingularDraws) +
                           " consecutive singular draws of B");
    }
    b = random_matrix(n, n, value_bound, rng);
  } while (lu_factor(b).singular());

  MatrixXd btb = b.transpose() * b;
  btb = (0.5 * (btb + btb.transpose())).eval();
  const auto eig = sym_eig(btb);
  const double sigma = eig.eigenvalues(0);
  const auto& u = eig.eigenvectors;
  const VectorXd shifted =
      (VectorXd::Ones(n) + (beta / sigma) * eig.eigenvalues).eval();
  MatrixXd q = u * shifted.asDiagonal() * u.transpose();
  return 0.5 * (q + q.transpose());
}

GeneratedInstance make_instance(const GeneratorConfig& cfg, Rng& rng) {
  cfg.validate();
  std::uniform_real_distribution<double> beta_dist(cfg.beta_low, cfg.beta_high);
  double beta = 0.0;
  while (beta == 0.0) beta = beta_dist(rng);

  GeneratedInstance inst;
  inst.beta = beta;
  inst.q.Q = make_spd_matrix(cfg.n, beta, rng, cfg.value_bound);
  inst.u = random_vector(cfg.n, cfg.value_bound, rng);
  const VectorXd up = inst.u.cwiseMax(0.0);
  inst.q.b_tilde = -(inst.q.Q * up - up + inst.u);
  inst.q.c = 0.0;
  inst.x0 = random_vector(cfg.n, cfg.value_bound, rng);
  return inst;
}

std::vector<GeneratedInstance> make_batch(const GeneratorConfig& cfg,
                                          std::size_t count) {
  cfg.validate();
  std::vector<GeneratedInstance> batch;
  batch.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng(substream_seed(cfg.seed, i));
    batch.push_back(make_instance(cfg, rng));
  }
  return batch;
}

}  // namespace ssn
