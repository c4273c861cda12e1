#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "eecdma/channel.hpp"
#include "eecdma/system.hpp"

namespace eecdma {

/// Population statistics seen by the large-system analysis.
struct LsaInputs {
  double alpha = 0.0;            ///< load K/N
  double noise_half_psd = 0.0;   ///< N0/2
  double gamma_target = 0.0;
  double p_max = 0.0;
  int K = 0;
  std::function<double(double)> inv_cdf;  ///< squared-gain quantile F^{-1}(y), y in [0, 1)
  double rate = 1e5;             ///< R, symbols/s
  double info_ratio = 1.0;       ///< L/M
  int packet_len = 120;          ///< M

  double processing_gain() const { return static_cast<double>(K) / alpha; }
  void validate() const;
};

/// Inputs for `cfg` with the channel model's quantile function and
/// gamma_target = target_sinr(cfg.M).
LsaInputs make_lsa_inputs(const SystemConfig& cfg, const ChannelModel& model);

/// Per sorted rank i = 1..K (strongest first).
struct LsaPrediction {
  Eigen::VectorXd powers;     ///< psi_i [W]
  Eigen::VectorXd sinrs;      ///< xi_i
  Eigen::VectorXd utilities;  ///< upsilon_i [bit/J]
  int u2 = 0;                 ///< users transmitting at p_max
  double receive_power = 0.0;
};

/// F^{-1}((K - i)/K) for i = 1..K.
std::vector<double> rank_quantiles(const LsaInputs& in);

/// Deterministic large-system SINR of a user received with power
/// `p_received` among interferers whose received powers are sampled in
/// `interferer_powers`: gamma = P / (N0/2 + alpha E[P_j P / (P + P_j gamma)]).
double asymptotic_sinr(double p_received, const LsaInputs& in, const std::vector<double>& interferer_powers);

/// Common received power reaching gamma_target for equal received powers.
/// Throws InfeasibleLoad when alpha >= 1 + 1/gamma_target.
double equal_power_receive_power(const LsaInputs& in);

/// Transmit power equal_power_receive_power / h_sq.
double equal_power_pc(const LsaInputs& in, double h_sq);

/// Number of quantile users whose equal-power transmit power exceeds p_max.
int estimate_u2(const LsaInputs& in);

/// Received power P solving
/// N P / (N N0/2 + u1 P/(1+g) + sum_capped P c_j / (P + c_j g)) = g,
/// c_j = p_max F^{-1}((K-j)/K) over the u2 weakest ranks.
/// u2 = 0 returns equal_power_receive_power. Throws InfeasibleLoad
/// ("target unreachable") when no positive root exists.
double solve_receive_power(const LsaInputs& in, int u2);

/// Left side of the receive-power equation divided by gamma_target, minus one.
double receive_power_residual(const LsaInputs& in, int u2, double P);

/// min(P / h_sq_own, p_max) with P from solve_receive_power(estimate_u2).
double distributed_power(const LsaInputs& in, double h_sq_own);

/// distributed_power for many users, solving for P once.
Eigen::VectorXd distributed_powers(const LsaInputs& in, const Eigen::VectorXd& h_sq);

/// Predicted profile with MMSE receivers and fixed random codes.
LsaPrediction profile_mmse(const LsaInputs& in);

/// SINR of a capped sorted user i (1-based) whose received power is
/// psi_i F^{-1}((K-i)/K), given P and the capped ranks K-u2+1..K.
double capped_user_sinr(const LsaInputs& in, const std::vector<double>& quantiles, int u2, double P, int i,
                        double psi_i);

/// Profile when codes are orthogonal (K <= N): each user is noise limited.
LsaPrediction profile_orthogonal(const LsaInputs& in);

/// Oversaturated profile with WBE codes and equal received powers; every
/// user is assumed to reach gamma_target, so powers are not capped.
LsaPrediction profile_wbe(const LsaInputs& in);

/// Received power P_R = g N0/2 / (1 - g (alpha - 1)) that gives every user
/// SINR g with WBE codes. Throws InfeasibleLoad when alpha >= 1 + 1/g.
double wbe_receive_power(double gamma, double alpha, double noise_half_psd);

/// Common SINR maximizing the sum utility with WBE codes and equal received
/// powers: root of M g [1 - g (alpha - 1)] = e^g - 1.
double social_optimum_sinr(const LsaInputs& in, int M, double rel_tol = 1e-12);

/// Social-optimum profile: SINR social_optimum_sinr everywhere, equal
/// received powers wbe_receive_power.
LsaPrediction profile_social(const LsaInputs& in);

}  // namespace eecdma
