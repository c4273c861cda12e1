#pragma once

#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "eecdma/system.hpp"
#include "eecdma/tmse.hpp"

namespace eecdma {

/// Which strategies the users may adapt besides their transmit power.
enum class GameVariant {
  PowerOnlyMf,          ///< conventional matched filter, d_k = s_k
  PowerMmse,            ///< MMSE receiver, fixed codes
  FullCrossLayer,       ///< MMSE receiver and TMSE-optimal codes
  MulticellPowerMmse,   ///< MMSE receiver at the assigned AP, fixed codes
  MulticellFull,        ///< MMSE receiver and codes s_k = d_k / ||d_k||, K <= N only
};

std::string_view to_string(GameVariant v);
/// Parses the upper-case tags ("POWER_ONLY_MF", ...). Throws InvalidArgument.
GameVariant parse_variant(std::string_view tag);
bool is_multicell(GameVariant v);

struct GameConfig {
  double target_sinr_tol = 1e-12;  ///< relative tolerance of the gamma-bar root
  double power_tol = 1e-6;         ///< outer loop: max relative power change
  int outer_max_iters = 50000;
  double pc_tol = 1e-8;            ///< inner power-control fixed point
  int pc_max_iters = 20000;
  int code_sweeps_per_round = 1;   ///< code/receiver sweeps between power-control phases
  TmseConfig tmse{};               ///< code_tol also gates outer convergence

  void validate() const;
};

struct GameOutcome {
  NetworkState state;           ///< for multi-cell runs, gains are toward each user's own AP
  Eigen::VectorXd sinrs;
  Eigen::VectorXd utilities;    ///< bit/J
  double gamma_target = 0.0;
  double last_power_change = 0.0;
  double last_code_change = 0.0;
  int iterations_used = 0;
  bool converged = false;
};

/// Multi-cell uplink with a fixed user-to-AP assignment.
struct MultiCellState {
  int num_aps = 1;
  Eigen::MatrixXd gains;        ///< B x K amplitudes h_{l,k}
  std::vector<int> assignment;  ///< a(k), zero-based AP index
  Eigen::VectorXd powers;
  Eigen::MatrixXd codes;
  Eigen::MatrixXd receivers;

  Eigen::Index users() const { return powers.size(); }
  void validate(const SystemConfig& cfg) const;
};

/// Wraps a single-cell state as a one-AP multi-cell state.
MultiCellState as_multicell(const NetworkState& state);

/// Unique positive root gamma-bar of f(gamma) = gamma f'(gamma), f = (1 - e^{-gamma})^M.
/// Throws InvalidArgument for M < 2.
double target_sinr(int M, double rel_tol = 1e-12);

/// One standard power-control step with the receivers held in `state`:
/// p_k <- min(p_max, p_k gamma_target / gamma_k).
/// Throws NumericalError("degenerate SINR") when gamma_k = 0 and p_k > 0.
Eigen::VectorXd power_control_step(const NetworkState& state, const SystemConfig& cfg, double gamma_target);

/// Runs a single-cell game (PowerOnlyMf, PowerMmse or FullCrossLayer) to
/// its Nash equilibrium. Initial powers must lie in (0, p_max].
GameOutcome run_game(const NetworkState& state, const SystemConfig& cfg, GameVariant variant,
                     const GameConfig& gcfg = {});

/// Multi-cell counterpart for MulticellPowerMmse and MulticellFull.
/// MulticellFull with K > N throws InvalidArgument.
GameOutcome run_game_multicell(const MultiCellState& state, const SystemConfig& cfg, GameVariant variant,
                               const GameConfig& gcfg = {});

/// Covariance of the data received at AP `ap`.
Eigen::MatrixXd ap_covariance(const MultiCellState& state, const SystemConfig& cfg, int ap);

/// SINR of user k at its assigned AP with the receiver in state.receivers.
double multicell_sinr(const MultiCellState& state, const SystemConfig& cfg, Eigen::Index k);

/// Total MSE of a multi-cell state, every user measured at its own AP.
double multicell_tmse(const MultiCellState& state, const SystemConfig& cfg);

/// Unilateral-deviation check at an equilibrium.
struct NashReport {
  double max_relative_gain = 0.0;  ///< max over users of (best probe utility - utility) / utility
  Eigen::Index worst_user = -1;
};

/// SINR of user k per watt of its own power when every other strategy is
/// frozen and user k keeps its code: its receiver is the MMSE filter
/// (matched filter for PowerOnlyMf). SINR is linear in own power.
Eigen::VectorXd own_power_sinr_slopes(const MultiCellState& state, const SystemConfig& cfg, GameVariant variant);

/// Probes `candidate_powers` for every user, all other strategies frozen.
NashReport nash_probe(const MultiCellState& state, const SystemConfig& cfg, GameVariant variant,
                      const std::vector<double>& candidate_powers);

/// `points` log-spaced powers in [p_max 1e-9, p_max].
std::vector<double> power_grid(const SystemConfig& cfg, int points = 200);

}  // namespace eecdma
