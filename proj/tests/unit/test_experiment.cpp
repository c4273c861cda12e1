#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <set>
#include <string>

#include <gtest/gtest.h>

#include "eecdma/channel.hpp"
#include "eecdma/error.hpp"
#include "eecdma/experiment.hpp"
#include "eecdma/model.hpp"

namespace eecdma {
namespace {

namespace fs = std::filesystem;

ExperimentSpec parse(const std::string& text) {
  std::istringstream in(text);
  return parse_spec(in);
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("eecdma_test_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

TEST(Spec, ParsesKeysAndComments) {
  const ExperimentSpec s = parse(
      "# sweep\n"
      "experiment = GAME_SWEEP\n"
      "N = 8   # chips\n"
      "k_values = 2, 4\n"
      "variants = POWER_MMSE,FULL_CROSS_LAYER\n"
      "p_max_dbw = -20\n"
      "trials = 3\n"
      "seed = 77\n");
  EXPECT_EQ(s.experiment, ExperimentKind::GameSweep);
  EXPECT_EQ(s.cfg.N, 8);
  EXPECT_EQ(s.k_values, (std::vector<int>{2, 4}));
  ASSERT_EQ(s.variants.size(), 2u);
  EXPECT_EQ(s.variants[1], GameVariant::FullCrossLayer);
  EXPECT_NEAR(s.cfg.p_max, 1e-2, 1e-15);
  EXPECT_EQ(s.trials, 3);
  EXPECT_EQ(s.seed, 77u);
}

TEST(Spec, SingleKBecomesSweep) {
  EXPECT_EQ(parse("K = 12\n").k_values, std::vector<int>{12});
}

TEST(Spec, RejectsMalformedInput) {
  EXPECT_THROW(parse("bogus = 1\n"), InvalidArgument);
  EXPECT_THROW(parse("N = 8\nN = 9\n"), InvalidArgument);
  EXPECT_THROW(parse("N = eight\n"), InvalidArgument);
  EXPECT_THROW(parse("N 8\n"), InvalidArgument);
  EXPECT_THROW(parse("p_max = 1e-3\np_max_dbw = -30\n"), InvalidArgument);
  EXPECT_THROW(parse("trials = 0\n"), InvalidArgument);
  EXPECT_THROW(parse("experiment = FIG_99\n"), InvalidArgument);
  EXPECT_THROW(parse("variants = POWER_MAX\n"), InvalidArgument);
  try {
    parse("N = 8\n\nfoo = 1\n");
    FAIL();
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(Spec, EntriesRoundTrip) {
  const ExperimentSpec s = parse("experiment = LSA_SWEEP\nN = 32\nk_values = 8,16\nseed = 5\n");
  std::ostringstream text;
  for (const auto& [k, v] : spec_entries(s)) text << k << " = " << v << '\n';
  const ExperimentSpec again = parse(text.str());
  EXPECT_EQ(spec_entries(again), spec_entries(s));
}

TEST(Aggregate, AveragesRows) {
  ResultRow a, b;
  a.mean_utility = 1.0;
  b.mean_utility = 3.0;
  a.frac_at_pmax = 0.0;
  b.frac_at_pmax = 1.0;
  b.nonconverged = 1;
  const ResultRow r = aggregate({a, b});
  EXPECT_EQ(r.mean_utility, 2.0);
  EXPECT_EQ(r.frac_at_pmax, 0.5);
  EXPECT_EQ(r.trials, 2);
  EXPECT_EQ(r.nonconverged, 1);
  EXPECT_THROW(aggregate({}), InvalidArgument);
}

TEST(TrialRow, CountsCappedUsers) {
  Eigen::VectorXd p(4), g(4), u(4);
  p << 1.0, 0.5, 1.0 - 1e-12, 0.2;
  g << 1.0, 2.0, 3.0, 4.0;
  u << 4.0, 4.0, 4.0, 4.0;
  const ResultRow r = trial_row(p, g, u, 1.0);
  EXPECT_EQ(r.frac_at_pmax, 0.5);
  EXPECT_EQ(r.mean_sinr, 2.5);
  EXPECT_EQ(r.trials, 1);
}

TEST(FormatDouble, RoundTripsAndNonFinite) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(std::stod(format_double(6.689236490525920)), 6.689236490525920);
  EXPECT_EQ(format_double(std::nan("")), "nan");
  EXPECT_EQ(format_double(-INFINITY), "-inf");
}

TEST(Efficiency, CurveEndpoints) {
  ExperimentSpec s;
  s.experiment = ExperimentKind::FigEfficiency;
  const ExperimentReport rep = compute_experiment(s);
  ASSERT_EQ(rep.efficiency.size(), 401u);
  EXPECT_EQ(rep.efficiency.front().gamma, 0.0);
  EXPECT_EQ(rep.efficiency.front().efficiency, 0.0);
  EXPECT_EQ(rep.efficiency.back().gamma, 20.0);
  EXPECT_NEAR(rep.efficiency.back().efficiency, efficiency(20.0, 120), 1e-15);
  for (std::size_t i = 1; i < rep.efficiency.size(); ++i) {
    EXPECT_GE(rep.efficiency[i].efficiency, rep.efficiency[i - 1].efficiency);
    EXPECT_GE(rep.efficiency[i].packet_success, rep.efficiency[i].efficiency);
  }
}

TEST(GameSweep, SingleUserHitsTargetOrCap) {
  ExperimentSpec s = parse("experiment = GAME_SWEEP\nN = 8\nK = 1\ntrials = 1\nseed = 3\n");
  const ExperimentReport rep = compute_experiment(s);
  ASSERT_EQ(rep.rows.size(), 3u);
  ChannelModel model = s.model;
  model.seed = s.seed;
  SystemConfig cfg = s.cfg;
  cfg.K = 1;
  const double h = sample(model, cfg, 0).gains[0];
  const double expected = std::min(target_sinr(120), cfg.p_max * h * h / cfg.noise_var());
  for (const ResultRow& r : rep.rows) {
    EXPECT_NEAR(r.mean_sinr, expected, 1e-5 * expected) << r.variant;
    EXPECT_EQ(r.trials, 1);
  }
}

TEST(GameSweep, DeterministicForSeed) {
  const ExperimentSpec s = parse("experiment = GAME_SWEEP\nN = 8\nk_values = 4,10\ntrials = 2\nseed = 11\n");
  const ExperimentReport a = compute_experiment(s);
  const ExperimentReport b = compute_experiment(s);
  ASSERT_EQ(a.rows.size(), 6u);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].mean_utility, b.rows[i].mean_utility);
    EXPECT_EQ(a.rows[i].mean_tx_power, b.rows[i].mean_tx_power);
  }
}

TEST(GameSweep, UnsupportedCombinationBecomesErrorRow) {
  const ExperimentSpec s =
      parse("experiment = GAME_SWEEP\nN = 4\nk_values = 6\nvariants = MULTICELL_FULL\nnum_aps = 2\ntrials = 1\n");
  const ExperimentReport rep = compute_experiment(s);
  ASSERT_EQ(rep.rows.size(), 1u);
  EXPECT_TRUE(std::isnan(rep.rows[0].mean_utility));
  EXPECT_EQ(rep.rows[0].trials, 0);
  EXPECT_FALSE(rep.rows[0].error.empty());
  EXPECT_EQ(rep.errors.size(), 1u);
}

TEST(Output, WritesCsvAndManifest) {
  const fs::path dir = scratch_dir("out");
  ExperimentSpec s = parse("experiment = GAME_SWEEP\nN = 8\nk_values = 3\ntrials = 1\n");
  s.output_path = dir.string();
  const ExperimentReport rep = run_experiment(s);
  ASSERT_EQ(rep.files.size(), 1u);
  EXPECT_EQ(first_line(dir / "game_sweep.csv"), kSweepHeader);
  EXPECT_TRUE(fs::exists(dir / "game_sweep.manifest.json"));
  fs::remove_all(dir);
}

TEST(Output, ProfileFilesPerK) {
  const fs::path dir = scratch_dir("profile");
  ExperimentSpec s = parse("experiment = POWER_PROFILE\nN = 8\nk_values = 4,10\nvariants = POWER_MMSE\ntrials = 1\n");
  s.output_path = dir.string();
  run_experiment(s);
  EXPECT_EQ(first_line(dir / "power_profile_K4.csv"), kProfileHeader);
  EXPECT_EQ(first_line(dir / "power_profile_K10.csv"), kProfileHeader);
  fs::remove_all(dir);
}

TEST(Output, EnvironmentOverridesDirectory) {
  const fs::path dir = scratch_dir("env");
  ::setenv("EECDMA_OUTPUT_DIR", dir.c_str(), 1);
  ExperimentSpec s;
  s.experiment = ExperimentKind::FigEfficiency;
  s.output_path = "/nonexistent-should-not-be-used";
  run_experiment(s);
  ::unsetenv("EECDMA_OUTPUT_DIR");
  EXPECT_EQ(first_line(dir / "fig_efficiency.csv"), kEfficiencyHeader);
  fs::remove_all(dir);
}

TEST(Output, UnwritableDirectoryThrows) {
  ExperimentSpec s;
  s.experiment = ExperimentKind::FigEfficiency;
  s.output_path = "/proc/eecdma/out";
  EXPECT_THROW(run_experiment(s), InvalidArgument);
}

TEST(LsaPredict, MethodsDependOnLoad) {
  const ExperimentSpec s = parse("experiment = POWER_PROFILE\nN = 16\nk_values = 8,17\n");
  const std::vector<ProfileRow> rows = lsa_predict(s);
  std::set<std::string> under, over;
  for (const ProfileRow& r : rows) (r.K == 8 ? under : over).insert(r.method);
  EXPECT_EQ(under, (std::set<std::string>{"LSA_MMSE", "LSA_ORTHOGONAL"}));
  EXPECT_EQ(over, (std::set<std::string>{"LSA_MMSE", "LSA_WBE", "SOCIAL_OPTIMUM_LSA"}));
}

TEST(LsaPredict, InfeasibleLoadKeepsFeasibleMethods) {
  // alpha = 1.25 exceeds 1 + 1/gamma-bar, so only the social profile exists.
  const ExperimentSpec s = parse("experiment = POWER_PROFILE\nN = 16\nk_values = 20\n");
  std::set<std::string> methods;
  for (const ProfileRow& r : lsa_predict(s)) methods.insert(r.method);
  EXPECT_EQ(methods, std::set<std::string>{"SOCIAL_OPTIMUM_LSA"});
}

}  // namespace
}  // namespace eecdma
