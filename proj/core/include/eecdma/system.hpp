#pragma once

#include <cmath>
#include <cstddef>

#include <Eigen/Dense>

namespace eecdma {

/// Global link-level constants. Powers are in watts, rates in symbols/s.
struct SystemConfig {
  int N = 16;                 ///< processing gain (chips per symbol)
  int K = 1;                  ///< number of active users
  double noise_psd = 1e-9;    ///< one-sided noise PSD N0 [W/Hz]; formulas use N0/2
  int M = 120;                ///< packet length [symbols]
  int L = 120;                ///< information symbols per packet
  double R = 1e5;             ///< common symbol rate [symbols/s]
  double p_max = 3.1622776601683794e-3;  ///< per-user power cap [W] (-25 dBW)

  double noise_var() const { return noise_psd / 2.0; }
  double info_ratio() const { return static_cast<double>(L) / static_cast<double>(M); }

  /// Throws InvalidArgument when an invariant does not hold.
  void validate() const;
};

/// Full game state of a single-cell synchronous CDMA uplink.
///
/// `codes` and `receivers` are N x K with one column per user. Codes have
/// unit Euclidean norm; receivers are unconstrained.
struct NetworkState {
  Eigen::VectorXd powers;      ///< transmit powers p_k [W]
  Eigen::VectorXd gains;       ///< channel amplitudes h_k
  Eigen::MatrixXd codes;       ///< spreading codes S
  Eigen::MatrixXd receivers;   ///< linear receive filters D

  Eigen::Index users() const { return powers.size(); }
  Eigen::Index dim() const { return codes.rows(); }

  /// Received powers p_k h_k^2.
  Eigen::VectorXd received_powers() const {
    return (powers.array() * gains.array().square()).matrix();
  }

  /// Throws InvalidArgument when shapes disagree, a code column is not unit
  /// norm (1e-9), or a power lies outside [0, p_max].
  void validate(const SystemConfig& cfg) const;
};

/// Builds a state with zero receivers from powers, gains and codes.
NetworkState make_state(Eigen::VectorXd powers, Eigen::VectorXd gains, Eigen::MatrixXd codes);

inline double to_db(double linear) { return 10.0 * std::log10(linear); }
inline double from_db(double db) { return std::pow(10.0, db / 10.0); }
inline double dbw_to_watts(double dbw) { return from_db(dbw); }
inline double watts_to_dbw(double w) { return to_db(w); }

}  // namespace eecdma
