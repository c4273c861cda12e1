#pragma once

#include <Eigen/Dense>

#include "eecdma/system.hpp"

namespace eecdma {

// Signal model primitives. Everything here is a pure function of its inputs.

/// Data covariance M = S H P H^T S^T + (N0/2) I.
Eigen::MatrixXd covariance(const NetworkState& state, const SystemConfig& cfg);

/// Output SINR of user k with the receiver stored in state.receivers.col(k).
/// Throws InvalidArgument("zero receiver") when that column is zero.
double sinr(const NetworkState& state, const SystemConfig& cfg, Eigen::Index k);

/// MSE E{(b_k - d_k^T r)^2} = 1 + d^T M d - 2 sqrt(p_k) h_k d^T s_k.
double mse(const NetworkState& state, const SystemConfig& cfg, Eigen::Index k);

/// Linear MMSE filter sqrt(p_k) h_k M^{-1} s_k (Cholesky solve).
/// Throws InvalidArgument for an inactive user (p_k == 0).
Eigen::VectorXd mmse_receiver(const NetworkState& state, const SystemConfig& cfg, Eigen::Index k);

/// SINR reached by the MMSE receiver, p_k h_k^2 s_k^T (M - p_k h_k^2 s_k s_k^T)^{-1} s_k.
double sinr_mmse(const NetworkState& state, const SystemConfig& cfg, Eigen::Index k);

/// MMSE SINR of every user from one factorization of M, through
/// gamma = a t / (1 - a t) with t = s^T M^{-1} s. Users with p_k == 0 get 0.
Eigen::VectorXd sinr_mmse_all(const NetworkState& state, const SystemConfig& cfg);

/// Gaussian tail Q(x).
double q_function(double x);

/// Probability of an error-free uncoded BPSK packet, [1 - Q(sqrt(2 gamma))]^M.
double packet_success(double gamma, int M);

/// Efficiency function f(gamma) = (1 - e^{-gamma})^M.
double efficiency(double gamma, int M);

/// f'(gamma) = M e^{-gamma} (1 - e^{-gamma})^{M-1}.
double efficiency_derivative(double gamma, int M);

/// Utility R (L/M) f(gamma) / p in bit/J. Throws InvalidArgument at p <= 0.
double utility(double p, double gamma, const SystemConfig& cfg);

}  // namespace eecdma
