#include "eecdma/model.hpp"

#include <cmath>
#include <string>

#include "eecdma/error.hpp"

namespace eecdma {

void SystemConfig::validate() const {
  if (N < 1) throw InvalidArgument("SystemConfig: N must be >= 1");
  if (K < 1) throw InvalidArgument("SystemConfig: K must be >= 1");
  if (M < 1) throw InvalidArgument("SystemConfig: M must be >= 1");
  if (L < 1 || L > M) throw InvalidArgument("SystemConfig: L must satisfy 1 <= L <= M");
  if (!(noise_psd > 0.0)) throw InvalidArgument("SystemConfig: noise_psd must be > 0");
  if (!(R > 0.0)) throw InvalidArgument("SystemConfig: R must be > 0");
  if (!(p_max > 0.0)) throw InvalidArgument("SystemConfig: p_max must be > 0");
}

void NetworkState::validate(const SystemConfig& cfg) const {
  const Eigen::Index k = powers.size();
  if (gains.size() != k || codes.cols() != k || receivers.cols() != k) {
    throw InvalidArgument("NetworkState: per-user sizes disagree");
  }
  if (receivers.rows() != codes.rows()) {
    throw InvalidArgument("NetworkState: codes and receivers differ in dimension");
  }
  for (Eigen::Index i = 0; i < k; ++i) {
    if (std::abs(codes.col(i).norm() - 1.0) > 1e-9) {
      throw InvalidArgument("NetworkState: code column " + std::to_string(i) + " is not unit norm");
    }
    if (!(powers[i] >= 0.0) || powers[i] > cfg.p_max * (1.0 + 1e-12)) {
      throw InvalidArgument("NetworkState: power " + std::to_string(i) + " outside [0, p_max]");
    }
    if (!(gains[i] > 0.0) || !std::isfinite(gains[i])) {
      throw InvalidArgument("NetworkState: gain " + std::to_string(i) + " must be finite and > 0");
    }
  }
}

NetworkState make_state(Eigen::VectorXd powers, Eigen::VectorXd gains, Eigen::MatrixXd codes) {
  NetworkState s;
  s.receivers = Eigen::MatrixXd::Zero(codes.rows(), codes.cols());
  s.powers = std::move(powers);
  s.gains = std::move(gains);
  s.codes = std::move(codes);
  return s;
}

Eigen::MatrixXd covariance(const NetworkState& state, const SystemConfig& cfg) {
  const Eigen::Index n = state.dim();
  const Eigen::VectorXd amp = state.received_powers().cwiseSqrt();
  const Eigen::MatrixXd weighted = state.codes * amp.asDiagonal();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  m.selfadjointView<Eigen::Lower>().rankUpdate(weighted);
  m.triangularView<Eigen::StrictlyUpper>() = m.transpose();
  m.diagonal().array() += cfg.noise_var();
  return m;
}

double sinr(const NetworkState& state, const SystemConfig& cfg, Eigen::Index k) {
  const auto d = state.receivers.col(k);
  const double d_sq = d.squaredNorm();
  if (d_sq == 0.0) throw InvalidArgument("zero receiver");
  const Eigen::VectorXd proj = state.codes.transpose() * d;
  const Eigen::VectorXd a = state.received_powers();
  double interference = cfg.noise_var() * d_sq;
  for (Eigen::Index i = 0; i < state.users(); ++i) {
    if (i != k) interference += a[i] * proj[i] * proj[i];
  }
  return a[k] * proj[k] * proj[k] / interference;
}

double mse(const NetworkState& state, const SystemConfig& cfg, Eigen::Index k) {
  const auto d = state.receivers.col(k);
  const Eigen::MatrixXd m = covariance(state, cfg);
  return 1.0 + d.dot(m * d) - 2.0 * std::sqrt(state.powers[k]) * state.gains[k] * d.dot(state.codes.col(k));
}

Eigen::VectorXd mmse_receiver(const NetworkState& state, const SystemConfig& cfg, Eigen::Index k) {
  if (!(state.powers[k] > 0.0)) throw InvalidArgument("inactive user has no receiver");
  const Eigen::LLT<Eigen::MatrixXd> llt(covariance(state, cfg));
  return std::sqrt(state.powers[k]) * state.gains[k] * llt.solve(state.codes.col(k));
}

double sinr_mmse(const NetworkState& state, const SystemConfig& cfg, Eigen::Index k) {
  const double a = state.powers[k] * state.gains[k] * state.gains[k];
  if (a == 0.0) return 0.0;
  const auto s = state.codes.col(k);
  Eigen::MatrixXd interference = covariance(state, cfg);
  interference.noalias() -= a * s * s.transpose();
  const Eigen::LLT<Eigen::MatrixXd> llt(interference);
  return a * s.dot(llt.solve(s));
}

Eigen::VectorXd sinr_mmse_all(const NetworkState& state, const SystemConfig& cfg) {
  const Eigen::LLT<Eigen::MatrixXd> llt(covariance(state, cfg));
  const Eigen::MatrixXd solved = llt.solve(state.codes);
  const Eigen::VectorXd a = state.received_powers();
  Eigen::VectorXd out(state.users());
  for (Eigen::Index k = 0; k < state.users(); ++k) {
    const double at = a[k] * state.codes.col(k).dot(solved.col(k));
    out[k] = at / (1.0 - at);
  }
  return out;
}

double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double packet_success(double gamma, int M) {
  if (gamma < 0.0) throw InvalidArgument("packet_success: gamma must be >= 0");
  // Q(sqrt(2 gamma)) = erfc(sqrt(gamma)) / 2
  const double tail = 0.5 * std::erfc(std::sqrt(gamma));
  return std::exp(static_cast<double>(M) * std::log1p(-tail));
}

double efficiency(double gamma, int M) {
  if (gamma < 0.0) throw InvalidArgument("efficiency: gamma must be >= 0");
  return std::pow(-std::expm1(-gamma), M);
}

double efficiency_derivative(double gamma, int M) {
  if (gamma < 0.0) throw InvalidArgument("efficiency: gamma must be >= 0");
  if (M == 1) return std::exp(-gamma);
  return static_cast<double>(M) * std::exp(-gamma) * std::pow(-std::expm1(-gamma), M - 1);
}

double utility(double p, double gamma, const SystemConfig& cfg) {
  if (!(p > 0.0)) throw InvalidArgument("utility undefined at zero power");
  return cfg.R * cfg.info_ratio() * efficiency(gamma, cfg.M) / p;
}

}  // namespace eecdma
