#pragma once

// Seeded random instances of the nonnegative QP with a planted solution.
//
// Q = U (I + (beta / sigma) Sigma) U^T where B^T B = U Sigma U^T for a random
// nonsingular B, so ||Q - I|| = beta exactly; a planted u fixes
// b~ = -([Q - I] u+ + u).

#include <cstdint>
#include <random>
#include <vector>

#include "ssn/qp.hpp"

namespace ssn {

using Rng = std::mt19937_64;

struct GeneratorConfig {
  Index n = 100;
  // beta ~ U[beta_low, beta_high); a draw of exactly 0 is rejected so that
  // beta_low = 0 gives the open interval (0, beta_high).
  double beta_low = 0.0;
  double beta_high = 0.5;
  double value_bound = 1e6;  // entries of B, u, x0 ~ U[-value_bound, value_bound]
  std::uint64_t seed = 0;

  void validate() const;
};

struct GeneratedInstance {
  QpProblem<double> q;
  VectorXd u;   // planted solution of [Q - I] x+ + x = -b~
  VectorXd x0;  // random start
  double beta = 0.0;
};

/// Independent 64-bit seed for stream `index` of `seed` (splitmix64 mix).
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index);

VectorXd random_vector(Index n, double bound, Rng& rng);
MatrixXd random_matrix(Index rows, Index cols, double bound, Rng& rng);

/// SPD Q with ||Q - I|| = beta and spectrum in [1, 1 + beta].
MatrixXd make_spd_matrix(Index n, double beta, Rng& rng,
                         double value_bound = 1e6);

GeneratedInstance make_instance(const GeneratorConfig& cfg, Rng& rng);

/// Instance i is drawn from its own stream substream_seed(cfg.seed, i).
std::vector<GeneratedInstance> make_batch(const GeneratorConfig& cfg,
                                          std::size_t count);

}  // namespace ssn
