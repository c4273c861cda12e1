#pragma once

#include <cstdint>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "eecdma/system.hpp"

namespace eecdma {

/// E[h^2 d^n] for Rayleigh amplitudes whose mean is d^{-n/2}: the Rayleigh
/// scale is mean * sqrt(2/pi), so the mean square is 4/pi times mean^2.
inline constexpr double kRayleighPowerAtUnitDistance = 4.0 / std::numbers::pi;

/// Rayleigh fading times distance path loss for users dropped uniformly in
/// distance on [r_a, r_b].
struct ChannelModel {
  double r_a = 10.0;      ///< minimum distance [m]
  double r_b = 1000.0;    ///< maximum distance [m]
  double n_exp = 2.0;     ///< path-loss exponent
  int partitions = 200;   ///< distance grid size of the discretized CDF
  std::uint64_t seed = 0;

  void validate() const;
};

/// One drop of K users.
struct Realization {
  Eigen::VectorXd gains;      ///< amplitudes h_k
  Eigen::VectorXd distances;  ///< d_k [m]
  Eigen::MatrixXd codes;      ///< N x K, entries +-1/sqrt(N)
};

/// Draws distances, Rayleigh amplitudes (mean d^{-n/2}, i.e. 1/d for n = 2)
/// and random binary codes for cfg.K users. Fully determined by
/// (model.seed, trial).
Realization sample(const ChannelModel& model, const SystemConfig& cfg, std::uint64_t trial);

/// Amplitudes toward `num_aps` access points (B x K, independent distance
/// and fading per link) from the same seed/trial stream as `sample`, with
/// row 0 equal to sample(...).gains.
Eigen::MatrixXd sample_multicell_gains(const ChannelModel& model, const SystemConfig& cfg, int num_aps,
                                       std::uint64_t trial);

/// Discretized CDF of h^2, 1 - (1/P) sum_i exp(-x d_i^n / c), d_i = r_a + i (r_b - r_a)/P.
double cdf_sq_gain(const ChannelModel& model, double x);

/// Continuous-distance CDF of h^2 for n = 2 (erfc closed form).
/// Throws InvalidArgument when model.n_exp != 2.
double cdf_sq_gain_closed_form(const ChannelModel& model, double x);

/// Inverse of cdf_sq_gain for y in [0, 1). Throws InvalidArgument for y >= 1.
double inv_cdf_sq_gain(const ChannelModel& model, double y);

/// [F^{-1}((K - l)/K)] for l = 1..K, nonincreasing; the last entry is 0.
std::vector<double> sorted_gain_quantiles(const ChannelModel& model, int K);

/// Left-hand side of the inverse-CDF equation, sum_i z^{d_i^n / c}, for z in (0, 1].
double inverse_cdf_z_sum(const ChannelModel& model, double z);

}  // namespace eecdma
