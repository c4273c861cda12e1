#include "eecdma/game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "eecdma/error.hpp"
#include "eecdma/model.hpp"
#include "eecdma/roots.hpp"

namespace eecdma {
namespace {

enum class Phase { MatchedFilter, Mmse, Tmse, NormalizedMmse };

Phase phase_of(GameVariant v) {
  switch (v) {
    case GameVariant::PowerOnlyMf: return Phase::MatchedFilter;
    case GameVariant::PowerMmse:
    case GameVariant::MulticellPowerMmse: return Phase::Mmse;
    case GameVariant::FullCrossLayer: return Phase::Tmse;
    case GameVariant::MulticellFull: return Phase::NormalizedMmse;
  }
  throw InvalidArgument("unknown game variant");
}

// SINR of every user with the receivers held fixed: own_k p_k / (noise_k + sum_j cross_kj p_j).
class FixedReceiverSinr {
 public:
  FixedReceiverSinr(const MultiCellState& s, double sigma) {
    const Eigen::Index K = s.users();
    own_.resize(K);
    noise_.resize(K);
    cross_.resize(K, K);
    const Eigen::MatrixXd proj = s.receivers.transpose() * s.codes;  // (k, j) = d_k^T s_j
    for (Eigen::Index k = 0; k < K; ++k) {
      const int b = s.assignment[static_cast<std::size_t>(k)];
      for (Eigen::Index j = 0; j < K; ++j) {
        const double g = s.gains(b, j);
        cross_(k, j) = g * g * proj(k, j) * proj(k, j);
      }
      own_[k] = cross_(k, k);
      cross_(k, k) = 0.0;
      noise_[k] = sigma * s.receivers.col(k).squaredNorm();
    }
  }

  Eigen::VectorXd operator()(const Eigen::VectorXd& p) const {
    const Eigen::VectorXd interference = cross_ * p + noise_;
    return (own_.array() * p.array() / interference.array()).matrix();
  }

  Eigen::VectorXd step(const Eigen::VectorXd& p, double gamma_target, double p_max) const {
    const Eigen::VectorXd g = (*this)(p);
    Eigen::VectorXd next(p.size());
    for (Eigen::Index k = 0; k < p.size(); ++k) {
      if (!(g[k] > 0.0)) {
        if (p[k] > 0.0) throw NumericalError("degenerate SINR for user " + std::to_string(k));
        next[k] = 0.0;
        continue;
      }
      next[k] = std::min(p_max, p[k] * gamma_target / g[k]);
    }
    return next;
  }

 private:
  Eigen::VectorXd own_;
  Eigen::VectorXd noise_;
  Eigen::MatrixXd cross_;
};

double max_relative_change(const Eigen::VectorXd& from, const Eigen::VectorXd& to) {
  double worst = 0.0;
  for (Eigen::Index k = 0; k < from.size(); ++k) {
    worst = std::max(worst, std::abs(to[k] - from[k]) / from[k]);
  }
  return worst;
}

Eigen::MatrixXd covariance_at(const MultiCellState& s, double sigma, int ap) {
  const Eigen::Index N = s.codes.rows();
  Eigen::MatrixXd C = sigma * Eigen::MatrixXd::Identity(N, N);
  for (Eigen::Index j = 0; j < s.users(); ++j) {
    const double a = s.powers[j] * s.gains(ap, j) * s.gains(ap, j);
    C.selfadjointView<Eigen::Lower>().rankUpdate(s.codes.col(j), a);
  }
  return C.selfadjointView<Eigen::Lower>();
}

Eigen::MatrixXd mmse_receivers(const MultiCellState& s, double sigma) {
  Eigen::MatrixXd D(s.codes.rows(), s.users());
  for (int b = 0; b < s.num_aps; ++b) {
    bool used = false;
    for (int a : s.assignment) used = used || a == b;
    if (!used) continue;
    const Eigen::LLT<Eigen::MatrixXd> llt(covariance_at(s, sigma, b));
    if (llt.info() != Eigen::Success) throw NumericalError("covariance factorization failed");
    for (Eigen::Index k = 0; k < s.users(); ++k) {
      if (s.assignment[static_cast<std::size_t>(k)] != b) continue;
      D.col(k) = (std::sqrt(s.powers[k]) * s.gains(b, k)) * llt.solve(s.codes.col(k));
    }
  }
  return D;
}

double tmse_of(const MultiCellState& s, double sigma) {
  double total = 0.0;
  for (int b = 0; b < s.num_aps; ++b) {
    const Eigen::MatrixXd C = covariance_at(s, sigma, b);
    for (Eigen::Index k = 0; k < s.users(); ++k) {
      if (s.assignment[static_cast<std::size_t>(k)] != b) continue;
      const Eigen::VectorXd d = s.receivers.col(k);
      total += 1.0 + d.dot(C * d) - 2.0 * std::sqrt(s.powers[k]) * s.gains(b, k) * d.dot(s.codes.col(k));
    }
  }
  return total;
}

NetworkState single_cell_view(const MultiCellState& s) {
  NetworkState st;
  st.powers = s.powers;
  st.gains = s.gains.row(0).transpose();
  st.codes = s.codes;
  st.receivers = s.receivers;
  return st;
}

// Receiver (and code) phase of one outer iteration; returns the largest
// code entry change.
double optimize_strategies(MultiCellState& s, Phase phase, const SystemConfig& cfg, const GameConfig& gcfg) {
  const double sigma = cfg.noise_var();
  switch (phase) {
    case Phase::MatchedFilter:
      s.receivers = s.codes;
      return 0.0;
    case Phase::Mmse:
      s.receivers = mmse_receivers(s, sigma);
      return 0.0;
    case Phase::Tmse: {
      TmseConfig round = gcfg.tmse;
      round.max_iters = gcfg.code_sweeps_per_round;
      const TmseResult r = optimize(single_cell_view(s), cfg, round);
      s.codes = r.codes;
      s.receivers = r.receivers;
      return r.last_code_change;
    }
    case Phase::NormalizedMmse: {
      double change = 0.0;
      for (int it = 0; it < gcfg.code_sweeps_per_round; ++it) {
        change = 0.0;
        for (Eigen::Index k = 0; k < s.users(); ++k) {
          const int b = s.assignment[static_cast<std::size_t>(k)];
          const Eigen::LLT<Eigen::MatrixXd> llt(covariance_at(s, sigma, b));
          const Eigen::VectorXd d = (std::sqrt(s.powers[k]) * s.gains(b, k)) * llt.solve(s.codes.col(k));
          const Eigen::VectorXd next = d / d.norm();
          change = std::max(change, (next - s.codes.col(k)).cwiseAbs().maxCoeff());
          s.codes.col(k) = next;
        }
      }
      s.receivers = mmse_receivers(s, sigma);
      return change;
    }
  }
  return 0.0;
}

Eigen::VectorXd power_control(const FixedReceiverSinr& sinr, Eigen::VectorXd p, double gamma_target,
                              const SystemConfig& cfg, const GameConfig& gcfg) {
  for (int it = 0; it < gcfg.pc_max_iters; ++it) {
    const Eigen::VectorXd next = sinr.step(p, gamma_target, cfg.p_max);
    const double change = max_relative_change(p, next);
    p = next;
    if (change < gcfg.pc_tol) break;
  }
  return p;
}

GameOutcome run_engine(MultiCellState s, const SystemConfig& cfg, GameVariant variant, const GameConfig& gcfg) {
  const Phase phase = phase_of(variant);
  const double sigma = cfg.noise_var();
  GameOutcome out;
  out.gamma_target = target_sinr(cfg.M, gcfg.target_sinr_tol);

  const bool adapts_codes = phase == Phase::Tmse || phase == Phase::NormalizedMmse;
  const int max_escapes = static_cast<int>(std::min(s.codes.rows(), s.codes.cols()));
  int escapes = 0;
  for (int it = 1; it <= gcfg.outer_max_iters; ++it) {
    const double code_change = optimize_strategies(s, phase, cfg, gcfg);
    const FixedReceiverSinr sinr(s, sigma);
    const Eigen::VectorXd next = power_control(sinr, s.powers, out.gamma_target, cfg, gcfg);
    out.last_power_change = max_relative_change(s.powers, next);
    out.last_code_change = code_change;
    s.powers = next;
    out.iterations_used = it;
    if (out.last_power_change < gcfg.power_tol && code_change <= gcfg.tmse.code_tol) {
      if (adapts_codes && escapes < max_escapes && break_rank_deficiency(s.codes)) {
        ++escapes;
        continue;
      }
      out.converged = true;
      break;
    }
  }

  s.receivers = phase == Phase::MatchedFilter ? s.codes : mmse_receivers(s, sigma);
  out.sinrs = FixedReceiverSinr(s, sigma)(s.powers);
  out.utilities.resize(s.users());
  for (Eigen::Index k = 0; k < s.users(); ++k) out.utilities[k] = utility(s.powers[k], out.sinrs[k], cfg);

  out.state.powers = s.powers;
  out.state.gains.resize(s.users());
  for (Eigen::Index k = 0; k < s.users(); ++k) {
    out.state.gains[k] = s.gains(s.assignment[static_cast<std::size_t>(k)], k);
  }
  out.state.codes = std::move(s.codes);
  out.state.receivers = std::move(s.receivers);
  return out;
}

void check_initial_powers(const Eigen::VectorXd& p, const SystemConfig& cfg) {
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    if (!(p[k] > 0.0) || p[k] > cfg.p_max) {
      throw InvalidArgument("initial power of user " + std::to_string(k) + " outside (0, p_max]");
    }
  }
}

}  // namespace

std::string_view to_string(GameVariant v) {
  switch (v) {
    case GameVariant::PowerOnlyMf: return "POWER_ONLY_MF";
    case GameVariant::PowerMmse: return "POWER_MMSE";
    case GameVariant::FullCrossLayer: return "FULL_CROSS_LAYER";
    case GameVariant::MulticellPowerMmse: return "MULTICELL_POWER_MMSE";
    case GameVariant::MulticellFull: return "MULTICELL_FULL";
  }
  return "UNKNOWN";
}

GameVariant parse_variant(std::string_view tag) {
  for (GameVariant v : {GameVariant::PowerOnlyMf, GameVariant::PowerMmse, GameVariant::FullCrossLayer,
                        GameVariant::MulticellPowerMmse, GameVariant::MulticellFull}) {
    if (to_string(v) == tag) return v;
  }
  throw InvalidArgument("unknown game variant '" + std::string(tag) + "'");
}

bool is_multicell(GameVariant v) {
  return v == GameVariant::MulticellPowerMmse || v == GameVariant::MulticellFull;
}

void GameConfig::validate() const {
  if (!(target_sinr_tol > 0.0) || !(power_tol > 0.0) || !(pc_tol > 0.0)) {
    throw InvalidArgument("GameConfig: tolerances must be > 0");
  }
  if (outer_max_iters < 1 || pc_max_iters < 1 || code_sweeps_per_round < 1) throw InvalidArgument("GameConfig: iteration budgets must be >= 1");
  tmse.validate();
}

void MultiCellState::validate(const SystemConfig& cfg) const {
  const Eigen::Index K = users();
  if (num_aps < 1) throw InvalidArgument("MultiCellState: num_aps must be >= 1");
  if (gains.rows() != num_aps || gains.cols() != K || codes.cols() != K || receivers.cols() != K ||
      static_cast<Eigen::Index>(assignment.size()) != K) {
    throw InvalidArgument("MultiCellState: per-user sizes disagree");
  }
  if (receivers.rows() != codes.rows()) throw InvalidArgument("MultiCellState: codes and receivers differ in dimension");
  for (Eigen::Index k = 0; k < K; ++k) {
    const int a = assignment[static_cast<std::size_t>(k)];
    if (a < 0 || a >= num_aps) throw InvalidArgument("MultiCellState: assignment index out of range");
    if (std::abs(codes.col(k).norm() - 1.0) > 1e-9) throw InvalidArgument("MultiCellState: code column not unit norm");
    if (!(powers[k] >= 0.0) || powers[k] > cfg.p_max) throw InvalidArgument("MultiCellState: power outside [0, p_max]");
  }
  if (!gains.allFinite() || (gains.array() < 0.0).any()) throw InvalidArgument("MultiCellState: gains must be >= 0");
}

MultiCellState as_multicell(const NetworkState& state) {
  MultiCellState s;
  s.num_aps = 1;
  s.gains = state.gains.transpose();
  s.assignment.assign(static_cast<std::size_t>(state.users()), 0);
  s.powers = state.powers;
  s.codes = state.codes;
  s.receivers = state.receivers;
  if (s.receivers.size() == 0) s.receivers = Eigen::MatrixXd::Zero(s.codes.rows(), s.codes.cols());
  return s;
}

double target_sinr(int M, double rel_tol) {
  if (M < 2) throw InvalidArgument("target_sinr: M must be >= 2");
  const double m = static_cast<double>(M);
  // f = gamma f'  <=>  e^gamma - 1 = M gamma; negative just right of zero.
  const auto g = [m](double x) { return std::expm1(x) - m * x; };
  const double lo = std::log(m);
  return roots::solve_increasing_bracket(g, lo, 2.0 * lo, rel_tol);
}

Eigen::VectorXd power_control_step(const NetworkState& state, const SystemConfig& cfg, double gamma_target) {
  state.validate(cfg);
  return FixedReceiverSinr(as_multicell(state), cfg.noise_var()).step(state.powers, gamma_target, cfg.p_max);
}

GameOutcome run_game(const NetworkState& state, const SystemConfig& cfg, GameVariant variant,
                     const GameConfig& gcfg) {
  cfg.validate();
  gcfg.validate();
  if (is_multicell(variant)) throw InvalidArgument("run_game: multi-cell variant needs run_game_multicell");
  state.validate(cfg);
  check_initial_powers(state.powers, cfg);
  return run_engine(as_multicell(state), cfg, variant, gcfg);
}

GameOutcome run_game_multicell(const MultiCellState& state, const SystemConfig& cfg, GameVariant variant,
                               const GameConfig& gcfg) {
  cfg.validate();
  gcfg.validate();
  if (!is_multicell(variant)) throw InvalidArgument("run_game_multicell: single-cell variant");
  state.validate(cfg);
  check_initial_powers(state.powers, cfg);
  if (variant == GameVariant::MulticellFull && state.users() > state.codes.rows()) {
    throw InvalidArgument("MULTICELL_FULL requires K <= N");
  }
  return run_engine(state, cfg, variant, gcfg);
}

Eigen::MatrixXd ap_covariance(const MultiCellState& state, const SystemConfig& cfg, int ap) {
  if (ap < 0 || ap >= state.num_aps) throw InvalidArgument("ap_covariance: AP index out of range");
  return covariance_at(state, cfg.noise_var(), ap);
}

double multicell_sinr(const MultiCellState& state, const SystemConfig& cfg, Eigen::Index k) {
  if (k < 0 || k >= state.users()) throw InvalidArgument("multicell_sinr: user index out of range");
  return FixedReceiverSinr(state, cfg.noise_var())(state.powers)[k];
}

double multicell_tmse(const MultiCellState& state, const SystemConfig& cfg) {
  return tmse_of(state, cfg.noise_var());
}

Eigen::VectorXd own_power_sinr_slopes(const MultiCellState& state, const SystemConfig& cfg, GameVariant variant) {
  const double sigma = cfg.noise_var();
  const Eigen::Index K = state.users();
  Eigen::VectorXd slopes(K);
  if (phase_of(variant) == Phase::MatchedFilter) {
    const Eigen::MatrixXd gram = state.codes.transpose() * state.codes;
    for (Eigen::Index k = 0; k < K; ++k) {
      const int b = state.assignment[static_cast<std::size_t>(k)];
      double interference = sigma * gram(k, k);
      for (Eigen::Index j = 0; j < K; ++j) {
        if (j != k) interference += state.powers[j] * state.gains(b, j) * state.gains(b, j) * gram(k, j) * gram(k, j);
      }
      slopes[k] = state.gains(b, k) * state.gains(b, k) * gram(k, k) * gram(k, k) / interference;
    }
    return slopes;
  }
  for (Eigen::Index k = 0; k < K; ++k) {
    const int b = state.assignment[static_cast<std::size_t>(k)];
    MultiCellState others = state;
    others.powers[k] = 0.0;
    const Eigen::LLT<Eigen::MatrixXd> llt(covariance_at(others, sigma, b));
    const Eigen::VectorXd s = state.codes.col(k);
    slopes[k] = state.gains(b, k) * state.gains(b, k) * s.dot(llt.solve(s));
  }
  return slopes;
}

NashReport nash_probe(const MultiCellState& state, const SystemConfig& cfg, GameVariant variant,
                      const std::vector<double>& candidate_powers) {
  const Eigen::VectorXd slopes = own_power_sinr_slopes(state, cfg, variant);
  NashReport report;
  for (Eigen::Index k = 0; k < state.users(); ++k) {
    const double base = utility(state.powers[k], slopes[k] * state.powers[k], cfg);
    double best = base;
    for (double p : candidate_powers) best = std::max(best, utility(p, slopes[k] * p, cfg));
    double gain = 0.0;
    if (best > base) gain = base > 0.0 ? (best - base) / base : std::numeric_limits<double>::infinity();
    if (report.worst_user < 0 || gain > report.max_relative_gain) {
      report.max_relative_gain = gain;
      report.worst_user = k;
    }
  }
  return report;
}

std::vector<double> power_grid(const SystemConfig& cfg, int points) {
  if (points < 2) throw InvalidArgument("power_grid: need at least two points");
  std::vector<double> grid(static_cast<std::size_t>(points));
  const double lo = std::log(cfg.p_max * 1e-9);
  const double hi = std::log(cfg.p_max);
  for (int i = 0; i < points; ++i) {
    grid[static_cast<std::size_t>(i)] = std::exp(lo + (hi - lo) * i / (points - 1));
  }
  grid.back() = cfg.p_max;
  return grid;
}

}  // namespace eecdma
