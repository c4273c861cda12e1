#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

#include "eecdma/system.hpp"

namespace eecdma::testing {

inline Eigen::MatrixXd random_codes(std::mt19937_64& rng, int N, int K) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd S(N, K);
  for (int k = 0; k < K; ++k) {
    for (int n = 0; n < N; ++n) S(n, k) = g(rng);
    S.col(k).normalize();
  }
  return S;
}

inline Eigen::VectorXd random_uniform(std::mt19937_64& rng, int K, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::VectorXd v(K);
  for (int k = 0; k < K; ++k) v[k] = u(rng);
  return v;
}

/// Random state with received SNRs roughly in [0.1, 100].
inline NetworkState random_state(std::mt19937_64& rng, const SystemConfig& cfg, int N, int K) {
  const Eigen::VectorXd powers = random_uniform(rng, K, 0.05, 1.0) * cfg.p_max;
  Eigen::VectorXd gains(K);
  std::uniform_real_distribution<double> snr_db(-10.0, 20.0);
  for (int k = 0; k < K; ++k) {
    gains[k] = std::sqrt(from_db(snr_db(rng)) * cfg.noise_var() / powers[k]);
  }
  return make_state(powers, gains, random_codes(rng, N, K));
}

}  // namespace eecdma::testing
