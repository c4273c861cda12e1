#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "eecdma/channel.hpp"
#include "eecdma/game.hpp"
#include "eecdma/system.hpp"

namespace eecdma {

enum class ExperimentKind { FigEfficiency, GameSweep, PowerProfile, LsaSweep, OversatUtility };

std::string_view to_string(ExperimentKind e);
ExperimentKind parse_experiment(std::string_view tag);

struct ExperimentSpec {
  ExperimentKind experiment = ExperimentKind::GameSweep;
  SystemConfig cfg{};
  ChannelModel model{};
  int num_aps = 1;                   ///< APs for multi-cell variants; user k is served by AP k mod num_aps
  std::vector<GameVariant> variants{GameVariant::PowerOnlyMf, GameVariant::PowerMmse, GameVariant::FullCrossLayer};
  std::vector<int> k_values{4, 8, 12, 16, 20, 24};
  int trials = 200;
  std::uint64_t seed = 1;
  std::string output_path = "results";

  void validate() const;
};

/// Parses `key = value` lines; '#' starts a comment. Unknown keys, bad
/// values and duplicates throw InvalidArgument naming the line.
ExperimentSpec parse_spec(std::istream& in);
ExperimentSpec load_spec(const std::string& path);

/// Canonical key/value view of a spec, as recorded in the manifest.
std::map<std::string, std::string> spec_entries(const ExperimentSpec& spec);

struct ResultRow {
  std::string experiment;
  int K = 0;
  std::string variant;
  double mean_utility = 0.0;   ///< bit/J
  double mean_tx_power = 0.0;  ///< W
  double mean_sinr = 0.0;      ///< linear
  double frac_at_pmax = 0.0;
  int trials = 0;
  int nonconverged = 0;
  std::string error;           ///< non-empty for a failed combination; metrics are NaN
};

/// Arithmetic means over per-trial rows. Throws InvalidArgument when empty.
ResultRow aggregate(const std::vector<ResultRow>& rows);

/// Per-trial row for a set of per-user outcomes; p_k >= p_max (1 - 1e-9) counts as capped.
ResultRow trial_row(const Eigen::VectorXd& powers, const Eigen::VectorXd& sinrs, const Eigen::VectorXd& utilities,
                    double p_max);

struct ProfileRow {
  int K = 0;
  int rank = 0;                ///< 1 = strongest channel
  double quantile_gain = 0.0;  ///< F^{-1}((K - rank)/K)
  double power_w = 0.0;
  double sinr = 0.0;           ///< linear
  double utility_bpj = 0.0;
  std::string method;
};

struct EfficiencyRow {
  double gamma = 0.0;
  double packet_success = 0.0;
  double efficiency = 0.0;
};

struct ExperimentReport {
  std::vector<ResultRow> rows;
  std::vector<ProfileRow> profile;
  std::vector<EfficiencyRow> efficiency;
  std::vector<std::string> files;
  std::vector<std::string> errors;
};

/// Runs the experiment without touching the filesystem.
ExperimentReport compute_experiment(const ExperimentSpec& spec, const GameConfig& gcfg = {});

/// compute_experiment, then writes the CSV table(s) and a manifest into
/// spec.output_path (or $EECDMA_OUTPUT_DIR when set).
ExperimentReport run_experiment(const ExperimentSpec& spec, const GameConfig& gcfg = {});

/// Profiles predicted from quantiles alone for every K in spec.k_values.
std::vector<ProfileRow> lsa_predict(const ExperimentSpec& spec);

inline constexpr std::string_view kSweepHeader =
    "experiment,K,variant,mean_utility_bpj,mean_tx_power_w,mean_sinr_db,frac_at_pmax,trials";
inline constexpr std::string_view kProfileHeader = "rank,quantile_gain,power_w,sinr_db,utility_bpj,method";
inline constexpr std::string_view kEfficiencyHeader = "gamma,gamma_db,packet_success,efficiency";

void write_sweep_csv(std::ostream& out, const std::vector<ResultRow>& rows);
void write_profile_csv(std::ostream& out, const std::vector<ProfileRow>& rows);
void write_efficiency_csv(std::ostream& out, const std::vector<EfficiencyRow>& rows);

/// Shortest round-trip decimal form; "nan", "inf", "-inf" for non-finite values.
std::string format_double(double x);

}  // namespace eecdma
