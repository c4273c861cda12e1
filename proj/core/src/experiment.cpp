#include "eecdma/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "eecdma/error.hpp"
#include "eecdma/lsa.hpp"
#include "eecdma/model.hpp"

namespace eecdma {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kCapSlack = 1e-9;

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> items;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

template <class T>
T parse_number(const std::string& text, const std::string& where) {
  T value{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) throw InvalidArgument(where + ": cannot parse '" + text + "'");
  return value;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

SystemConfig with_users(SystemConfig cfg, int K) {
  cfg.K = K;
  return cfg;
}

ChannelModel seeded(const ExperimentSpec& spec) {
  ChannelModel m = spec.model;
  m.seed = spec.seed;
  return m;
}

ResultRow error_row(const ExperimentSpec& spec, int K, std::string variant, std::string message) {
  ResultRow r;
  r.experiment = std::string(to_string(spec.experiment));
  r.K = K;
  r.variant = std::move(variant);
  r.mean_utility = r.mean_tx_power = r.mean_sinr = r.frac_at_pmax = kNaN;
  r.trials = 0;
  r.error = std::move(message);
  return r;
}

GameOutcome play(const ExperimentSpec& spec, const SystemConfig& cfg, const Realization& r, int trial,
                 GameVariant v, const GameConfig& gcfg) {
  const Eigen::VectorXd p0 = Eigen::VectorXd::Constant(cfg.K, cfg.p_max / 100.0);
  if (!is_multicell(v)) return run_game(make_state(p0, r.gains, r.codes), cfg, v, gcfg);
  MultiCellState s;
  s.num_aps = spec.num_aps;
  s.gains = sample_multicell_gains(seeded(spec), cfg, spec.num_aps, static_cast<std::uint64_t>(trial));
  s.assignment.resize(static_cast<std::size_t>(cfg.K));
  for (int k = 0; k < cfg.K; ++k) s.assignment[static_cast<std::size_t>(k)] = k % spec.num_aps;
  s.powers = p0;
  s.codes = r.codes;
  s.receivers = Eigen::MatrixXd::Zero(r.codes.rows(), r.codes.cols());
  return run_game_multicell(s, cfg, v, gcfg);
}

// Outcome of applying fixed powers with MMSE receivers on a realization.
struct Applied {
  Eigen::VectorXd powers, sinrs, utilities;
};

Applied apply_powers(const SystemConfig& cfg, const Realization& r, Eigen::VectorXd powers) {
  const NetworkState st = make_state(powers, r.gains, r.codes);
  Applied a;
  a.sinrs = sinr_mmse_all(st, cfg);
  a.utilities.resize(cfg.K);
  for (int k = 0; k < cfg.K; ++k) a.utilities[k] = utility(powers[k], a.sinrs[k], cfg);
  a.powers = std::move(powers);
  return a;
}

// Per-rank running sums, ranks sorted by descending gain.
class RankAccumulator {
 public:
  explicit RankAccumulator(int K) : power_(Eigen::VectorXd::Zero(K)), sinr_(power_), utility_(power_) {}

  void add(const Eigen::VectorXd& gains, const Eigen::VectorXd& powers, const Eigen::VectorXd& sinrs,
           const Eigen::VectorXd& utilities) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(gains.size()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return gains[a] > gains[b]; });
    for (std::size_t i = 0; i < order.size(); ++i) {
      const Eigen::Index k = order[i];
      power_[static_cast<Eigen::Index>(i)] += powers[k];
      sinr_[static_cast<Eigen::Index>(i)] += sinrs[k];
      utility_[static_cast<Eigen::Index>(i)] += utilities[k];
    }
    ++count_;
  }

  void emit(std::vector<ProfileRow>& out, int K, const std::vector<double>& q, const std::string& method) const {
    for (int i = 0; i < K; ++i) {
      ProfileRow row;
      row.K = K;
      row.rank = i + 1;
      row.quantile_gain = q[static_cast<std::size_t>(i)];
      row.power_w = count_ ? power_[i] / count_ : kNaN;
      row.sinr = count_ ? sinr_[i] / count_ : kNaN;
      row.utility_bpj = count_ ? utility_[i] / count_ : kNaN;
      row.method = method;
      out.push_back(std::move(row));
    }
  }

 private:
  Eigen::VectorXd power_, sinr_, utility_;
  int count_ = 0;
};

void emit_prediction(std::vector<ProfileRow>& out, int K, const std::vector<double>& q, const LsaPrediction& p,
                     const std::string& method) {
  for (int i = 0; i < K; ++i) {
    out.push_back(ProfileRow{K, i + 1, q[static_cast<std::size_t>(i)], p.powers[i], p.sinrs[i], p.utilities[i], method});
  }
}

std::vector<ProfileRow> predictions_for(const ExperimentSpec& spec, int K, std::vector<std::string>& errors) {
  const SystemConfig cfg = with_users(spec.cfg, K);
  const LsaInputs in = make_lsa_inputs(cfg, seeded(spec));
  const std::vector<double> q = rank_quantiles(in);
  std::vector<ProfileRow> out;
  const auto attempt = [&](const char* method, auto&& fn) {
    try {
      emit_prediction(out, K, q, fn(in), method);
    } catch (const Error& e) {
      errors.push_back("K=" + std::to_string(K) + " " + method + ": " + e.what());
    }
  };
  attempt("LSA_MMSE", profile_mmse);
  if (K <= cfg.N) {
    attempt("LSA_ORTHOGONAL", profile_orthogonal);
  } else {
    attempt("LSA_WBE", profile_wbe);
    attempt("SOCIAL_OPTIMUM_LSA", profile_social);
  }
  return out;
}

void run_efficiency(const ExperimentSpec& spec, ExperimentReport& rep) {
  constexpr int kPoints = 401;
  constexpr double kMaxGamma = 20.0;
  for (int i = 0; i < kPoints; ++i) {
    const double g = kMaxGamma * i / (kPoints - 1);
    rep.efficiency.push_back({g, packet_success(g, spec.cfg.M), efficiency(g, spec.cfg.M)});
  }
}

void run_game_sweep(const ExperimentSpec& spec, const GameConfig& gcfg, ExperimentReport& rep) {
  const ChannelModel model = seeded(spec);
  for (int K : spec.k_values) {
    const SystemConfig cfg = with_users(spec.cfg, K);
    std::vector<std::vector<ResultRow>> per_variant(spec.variants.size());
    std::vector<std::string> failure(spec.variants.size());
    std::vector<int> nonconverged(spec.variants.size(), 0);
    for (int t = 0; t < spec.trials; ++t) {
      const Realization r = sample(model, cfg, static_cast<std::uint64_t>(t));
      for (std::size_t v = 0; v < spec.variants.size(); ++v) {
        if (!failure[v].empty()) continue;
        try {
          const GameOutcome o = play(spec, cfg, r, t, spec.variants[v], gcfg);
          per_variant[v].push_back(trial_row(o.state.powers, o.sinrs, o.utilities, cfg.p_max));
          if (!o.converged) ++nonconverged[v];
        } catch (const Error& e) {
          failure[v] = e.what();
        }
      }
    }
    for (std::size_t v = 0; v < spec.variants.size(); ++v) {
      const std::string tag(to_string(spec.variants[v]));
      if (!failure[v].empty()) {
        rep.rows.push_back(error_row(spec, K, tag, failure[v]));
        rep.errors.push_back("K=" + std::to_string(K) + " " + tag + ": " + failure[v]);
        continue;
      }
      ResultRow row = aggregate(per_variant[v]);
      row.experiment = std::string(to_string(spec.experiment));
      row.K = K;
      row.variant = tag;
      row.nonconverged = nonconverged[v];
      rep.rows.push_back(std::move(row));
    }
  }
}

void run_lsa_sweep(const ExperimentSpec& spec, const GameConfig& gcfg, ExperimentReport& rep) {
  const ChannelModel model = seeded(spec);
  const std::vector<std::string> methods{"CENTRALIZED", "LSA_DISTRIBUTED", "EQUAL_POWER_DISTRIBUTED"};
  for (int K : spec.k_values) {
    const SystemConfig cfg = with_users(spec.cfg, K);
    std::vector<std::vector<ResultRow>> per_method(methods.size());
    std::string failure;
    int nonconverged = 0;
    try {
      const LsaInputs in = make_lsa_inputs(cfg, model);
      const double P = solve_receive_power(in, estimate_u2(in));
      const double P_equal = equal_power_receive_power(in);
      for (int t = 0; t < spec.trials; ++t) {
        const Realization r = sample(model, cfg, static_cast<std::uint64_t>(t));
        const GameOutcome o = play(spec, cfg, r, t, GameVariant::PowerMmse, gcfg);
        if (!o.converged) ++nonconverged;
        per_method[0].push_back(trial_row(o.state.powers, o.sinrs, o.utilities, cfg.p_max));
        const Eigen::VectorXd h_sq = r.gains.array().square().matrix();
        const auto rule = [&](double receive) {
          return (receive / h_sq.array()).min(cfg.p_max).matrix().eval();
        };
        const Applied lsa = apply_powers(cfg, r, rule(P));
        per_method[1].push_back(trial_row(lsa.powers, lsa.sinrs, lsa.utilities, cfg.p_max));
        const Applied equal = apply_powers(cfg, r, rule(P_equal));
        per_method[2].push_back(trial_row(equal.powers, equal.sinrs, equal.utilities, cfg.p_max));
      }
    } catch (const Error& e) {
      failure = e.what();
    }
    for (std::size_t m = 0; m < methods.size(); ++m) {
      if (!failure.empty()) {
        rep.rows.push_back(error_row(spec, K, methods[m], failure));
        continue;
      }
      ResultRow row = aggregate(per_method[m]);
      row.experiment = std::string(to_string(spec.experiment));
      row.K = K;
      row.variant = methods[m];
      if (m == 0) row.nonconverged = nonconverged;
      rep.rows.push_back(std::move(row));
    }
    if (!failure.empty()) rep.errors.push_back("K=" + std::to_string(K) + ": " + failure);
  }
}

void run_profiles(const ExperimentSpec& spec, const GameConfig& gcfg, ExperimentReport& rep, bool oversat) {
  const ChannelModel model = seeded(spec);
  for (int K : spec.k_values) {
    const SystemConfig cfg = with_users(spec.cfg, K);
    const std::vector<double> q = sorted_gain_quantiles(model, K);
    const std::vector<GameVariant> variants =
        oversat ? std::vector<GameVariant>{GameVariant::FullCrossLayer} : spec.variants;
    std::vector<RankAccumulator> acc(variants.size(), RankAccumulator(K));
    std::vector<std::string> failure(variants.size());
    RankAccumulator social(K);
    std::string social_failure;
    double social_gamma = kNaN;
    if (oversat) {
      try {
        LsaInputs in = make_lsa_inputs(cfg, model);
        social_gamma = social_optimum_sinr(in, cfg.M);
      } catch (const Error& e) {
        social_failure = e.what();
      }
    }
    for (int t = 0; t < spec.trials; ++t) {
      const Realization r = sample(model, cfg, static_cast<std::uint64_t>(t));
      for (std::size_t v = 0; v < variants.size(); ++v) {
        if (!failure[v].empty()) continue;
        try {
          const GameOutcome o = play(spec, cfg, r, t, variants[v], gcfg);
          acc[v].add(o.state.gains, o.state.powers, o.sinrs, o.utilities);
        } catch (const Error& e) {
          failure[v] = e.what();
        }
      }
      if (oversat && social_failure.empty()) {
        try {
          const double PR = wbe_receive_power(social_gamma, static_cast<double>(K) / cfg.N, cfg.noise_var());
          const Eigen::VectorXd h_sq = r.gains.array().square().matrix();
          const Eigen::VectorXd p = (PR / h_sq.array()).matrix();
          Eigen::VectorXd u(K);
          for (int k = 0; k < K; ++k) u[k] = utility(p[k], social_gamma, cfg);
          social.add(r.gains, p, Eigen::VectorXd::Constant(K, social_gamma), u);
        } catch (const Error& e) {
          social_failure = e.what();
        }
      }
    }
    for (std::size_t v = 0; v < variants.size(); ++v) {
      const std::string tag(to_string(variants[v]));
      if (failure[v].empty()) {
        acc[v].emit(rep.profile, K, q, tag);
      } else {
        rep.errors.push_back("K=" + std::to_string(K) + " " + tag + ": " + failure[v]);
      }
    }
    if (oversat) {
      if (social_failure.empty()) {
        social.emit(rep.profile, K, q, "SOCIAL_OPTIMUM");
      } else {
        rep.errors.push_back("K=" + std::to_string(K) + " SOCIAL_OPTIMUM: " + social_failure);
      }
      try {
        emit_prediction(rep.profile, K, q, profile_wbe(make_lsa_inputs(cfg, model)), "LSA_WBE");
      } catch (const Error& e) {
        rep.errors.push_back("K=" + std::to_string(K) + " LSA_WBE: " + e.what());
      }
    } else {
      std::vector<ProfileRow> pred = predictions_for(spec, K, rep.errors);
      rep.profile.insert(rep.profile.end(), pred.begin(), pred.end());
    }
  }
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidArgument("cannot write '" + path.string() + "'");
  return out;
}

}  // namespace

std::string_view to_string(ExperimentKind e) {
  switch (e) {
    case ExperimentKind::FigEfficiency: return "FIG_EFFICIENCY";
    case ExperimentKind::GameSweep: return "GAME_SWEEP";
    case ExperimentKind::PowerProfile: return "POWER_PROFILE";
    case ExperimentKind::LsaSweep: return "LSA_SWEEP";
    case ExperimentKind::OversatUtility: return "OVERSAT_UTILITY";
  }
  return "UNKNOWN";
}

ExperimentKind parse_experiment(std::string_view tag) {
  for (ExperimentKind e : {ExperimentKind::FigEfficiency, ExperimentKind::GameSweep, ExperimentKind::PowerProfile,
                           ExperimentKind::LsaSweep, ExperimentKind::OversatUtility}) {
    if (to_string(e) == tag) return e;
  }
  throw InvalidArgument("unknown experiment '" + std::string(tag) + "'");
}

void ExperimentSpec::validate() const {
  cfg.validate();
  model.validate();
  if (trials < 1) throw InvalidArgument("ExperimentSpec: trials must be >= 1");
  if (num_aps < 1) throw InvalidArgument("ExperimentSpec: num_aps must be >= 1");
  if (experiment != ExperimentKind::FigEfficiency) {
    if (k_values.empty()) throw InvalidArgument("ExperimentSpec: k_values must be nonempty");
    for (int K : k_values) {
      if (K < 1) throw InvalidArgument("ExperimentSpec: every K must be >= 1");
    }
  }
  if ((experiment == ExperimentKind::GameSweep || experiment == ExperimentKind::PowerProfile) && variants.empty()) {
    throw InvalidArgument("ExperimentSpec: variants must be nonempty");
  }
  if (output_path.empty()) throw InvalidArgument("ExperimentSpec: output_path must be nonempty");
}

ExperimentSpec parse_spec(std::istream& in) {
  ExperimentSpec spec;
  std::set<std::string> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = "line " + std::to_string(line_no);
    if (eq == std::string::npos) throw InvalidArgument(where + ": expected key = value");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (!seen.insert(key).second) throw InvalidArgument(where + ": duplicate key '" + key + "'");
    const std::string ctx = where + " (" + key + ")";
    if (key == "experiment") {
      spec.experiment = parse_experiment(value);
    } else if (key == "N") {
      spec.cfg.N = parse_number<int>(value, ctx);
    } else if (key == "K") {
      spec.cfg.K = parse_number<int>(value, ctx);
    } else if (key == "noise_psd") {
      spec.cfg.noise_psd = parse_number<double>(value, ctx);
    } else if (key == "M") {
      spec.cfg.M = parse_number<int>(value, ctx);
    } else if (key == "L") {
      spec.cfg.L = parse_number<int>(value, ctx);
    } else if (key == "R") {
      spec.cfg.R = parse_number<double>(value, ctx);
    } else if (key == "p_max") {
      spec.cfg.p_max = parse_number<double>(value, ctx);
    } else if (key == "p_max_dbw") {
      spec.cfg.p_max = dbw_to_watts(parse_number<double>(value, ctx));
    } else if (key == "r_a") {
      spec.model.r_a = parse_number<double>(value, ctx);
    } else if (key == "r_b") {
      spec.model.r_b = parse_number<double>(value, ctx);
    } else if (key == "n_exp") {
      spec.model.n_exp = parse_number<double>(value, ctx);
    } else if (key == "partitions") {
      spec.model.partitions = parse_number<int>(value, ctx);
    } else if (key == "num_aps") {
      spec.num_aps = parse_number<int>(value, ctx);
    } else if (key == "variants") {
      spec.variants.clear();
      for (const std::string& v : split_list(value)) spec.variants.push_back(parse_variant(v));
    } else if (key == "k_values") {
      spec.k_values.clear();
      for (const std::string& v : split_list(value)) spec.k_values.push_back(parse_number<int>(v, ctx));
    } else if (key == "trials") {
      spec.trials = parse_number<int>(value, ctx);
    } else if (key == "seed") {
      spec.seed = parse_number<std::uint64_t>(value, ctx);
    } else if (key == "output_path") {
      spec.output_path = value;
    } else {
      throw InvalidArgument(where + ": unknown key '" + key + "'");
    }
  }
  if (seen.count("p_max") && seen.count("p_max_dbw")) throw InvalidArgument("p_max and p_max_dbw are exclusive");
  if (seen.count("K") && !seen.count("k_values")) spec.k_values = {spec.cfg.K};
  spec.validate();
  return spec;
}

ExperimentSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read config '" + path + "'");
  return parse_spec(in);
}

std::map<std::string, std::string> spec_entries(const ExperimentSpec& spec) {
  std::map<std::string, std::string> e;
  e["experiment"] = std::string(to_string(spec.experiment));
  e["N"] = std::to_string(spec.cfg.N);
  e["K"] = std::to_string(spec.cfg.K);
  e["noise_psd"] = format_double(spec.cfg.noise_psd);
  e["M"] = std::to_string(spec.cfg.M);
  e["L"] = std::to_string(spec.cfg.L);
  e["R"] = format_double(spec.cfg.R);
  e["p_max"] = format_double(spec.cfg.p_max);
  e["r_a"] = format_double(spec.model.r_a);
  e["r_b"] = format_double(spec.model.r_b);
  e["n_exp"] = format_double(spec.model.n_exp);
  e["partitions"] = std::to_string(spec.model.partitions);
  e["num_aps"] = std::to_string(spec.num_aps);
  std::string variants, ks;
  for (GameVariant v : spec.variants) variants += (variants.empty() ? "" : ",") + std::string(to_string(v));
  for (int K : spec.k_values) ks += (ks.empty() ? "" : ",") + std::to_string(K);
  e["variants"] = variants;
  e["k_values"] = ks;
  e["trials"] = std::to_string(spec.trials);
  e["seed"] = std::to_string(spec.seed);
  e["output_path"] = spec.output_path;
  return e;
}

ResultRow trial_row(const Eigen::VectorXd& powers, const Eigen::VectorXd& sinrs, const Eigen::VectorXd& utilities,
                    double p_max) {
  ResultRow r;
  r.mean_utility = utilities.mean();
  r.mean_tx_power = powers.mean();
  r.mean_sinr = sinrs.mean();
  r.frac_at_pmax = (powers.array() >= p_max * (1.0 - kCapSlack)).cast<double>().mean();
  r.trials = 1;
  return r;
}

ResultRow aggregate(const std::vector<ResultRow>& rows) {
  if (rows.empty()) throw InvalidArgument("aggregate: no rows");
  ResultRow out = rows.front();
  out.mean_utility = out.mean_tx_power = out.mean_sinr = out.frac_at_pmax = 0.0;
  out.nonconverged = 0;
  for (const ResultRow& r : rows) {
    out.mean_utility += r.mean_utility;
    out.mean_tx_power += r.mean_tx_power;
    out.mean_sinr += r.mean_sinr;
    out.frac_at_pmax += r.frac_at_pmax;
    out.nonconverged += r.nonconverged;
  }
  const double n = static_cast<double>(rows.size());
  out.mean_utility /= n;
  out.mean_tx_power /= n;
  out.mean_sinr /= n;
  out.frac_at_pmax /= n;
  out.trials = static_cast<int>(rows.size());
  return out;
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

void write_sweep_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << kSweepHeader << '\n';
  for (const ResultRow& r : rows) {
    const double sinr_db = std::isnan(r.mean_sinr) ? kNaN : to_db(r.mean_sinr);
    out << r.experiment << ',' << r.K << ',' << r.variant << ',' << format_double(r.mean_utility) << ','
        << format_double(r.mean_tx_power) << ',' << format_double(sinr_db) << ',' << format_double(r.frac_at_pmax)
        << ',' << r.trials << '\n';
  }
}

void write_profile_csv(std::ostream& out, const std::vector<ProfileRow>& rows) {
  out << kProfileHeader << '\n';
  for (const ProfileRow& r : rows) {
    out << r.rank << ',' << format_double(r.quantile_gain) << ',' << format_double(r.power_w) << ','
        << format_double(to_db(r.sinr)) << ',' << format_double(r.utility_bpj) << ',' << r.method << '\n';
  }
}

void write_efficiency_csv(std::ostream& out, const std::vector<EfficiencyRow>& rows) {
  out << kEfficiencyHeader << '\n';
  for (const EfficiencyRow& r : rows) {
    out << format_double(r.gamma) << ',' << format_double(to_db(r.gamma)) << ',' << format_double(r.packet_success)
        << ',' << format_double(r.efficiency) << '\n';
  }
}

ExperimentReport compute_experiment(const ExperimentSpec& spec, const GameConfig& gcfg) {
  spec.validate();
  gcfg.validate();
  ExperimentReport rep;
  switch (spec.experiment) {
    case ExperimentKind::FigEfficiency: run_efficiency(spec, rep); break;
    case ExperimentKind::GameSweep: run_game_sweep(spec, gcfg, rep); break;
    case ExperimentKind::LsaSweep: run_lsa_sweep(spec, gcfg, rep); break;
    case ExperimentKind::PowerProfile: run_profiles(spec, gcfg, rep, false); break;
    case ExperimentKind::OversatUtility: run_profiles(spec, gcfg, rep, true); break;
  }
  return rep;
}

ExperimentReport run_experiment(const ExperimentSpec& spec, const GameConfig& gcfg) {
  namespace fs = std::filesystem;
  spec.validate();
  fs::path dir = spec.output_path;
  if (const char* env = std::getenv("EECDMA_OUTPUT_DIR"); env != nullptr && *env != '\0') dir = env;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw InvalidArgument("cannot create output directory '" + dir.string() + "'");

  ExperimentReport rep = compute_experiment(spec, gcfg);
  const std::string stem = lower(to_string(spec.experiment));

  switch (spec.experiment) {
    case ExperimentKind::FigEfficiency: {
      const fs::path p = dir / (stem + ".csv");
      auto out = open_output(p);
      write_efficiency_csv(out, rep.efficiency);
      rep.files.push_back(p.string());
      break;
    }
    case ExperimentKind::GameSweep:
    case ExperimentKind::LsaSweep: {
      const fs::path p = dir / (stem + ".csv");
      auto out = open_output(p);
      write_sweep_csv(out, rep.rows);
      rep.files.push_back(p.string());
      break;
    }
    case ExperimentKind::PowerProfile:
    case ExperimentKind::OversatUtility: {
      for (int K : spec.k_values) {
        std::vector<ProfileRow> rows;
        std::copy_if(rep.profile.begin(), rep.profile.end(), std::back_inserter(rows),
                     [K](const ProfileRow& r) { return r.K == K; });
        const fs::path p = dir / (stem + "_K" + std::to_string(K) + ".csv");
        auto out = open_output(p);
        write_profile_csv(out, rows);
        rep.files.push_back(p.string());
      }
      break;
    }
  }

  nlohmann::ordered_json manifest;
  manifest["experiment"] = std::string(to_string(spec.experiment));
  manifest["created_utc"] = utc_timestamp();
  manifest["seed"] = spec.seed;
  manifest["spec"] = spec_entries(spec);
  manifest["files"] = rep.files;
  manifest["errors"] = rep.errors;
  nlohmann::ordered_json warnings = nlohmann::ordered_json::array();
  for (const ResultRow& r : rep.rows) {
    if (r.nonconverged > 0) {
      warnings.push_back({{"K", r.K}, {"variant", r.variant}, {"nonconverged_trials", r.nonconverged}});
    }
  }
  manifest["warnings"] = warnings;
  const fs::path mp = dir / (stem + ".manifest.json");
  auto out = open_output(mp);
  out << manifest.dump(2) << '\n';
  return rep;
}

std::vector<ProfileRow> lsa_predict(const ExperimentSpec& spec) {
  spec.validate();
  std::vector<std::string> errors;
  std::vector<ProfileRow> rows;
  for (int K : spec.k_values) {
    std::vector<ProfileRow> pred = predictions_for(spec, K, errors);
    rows.insert(rows.end(), pred.begin(), pred.end());
  }
  if (!errors.empty() && rows.empty()) throw InfeasibleLoad(errors.front());
  return rows;
}

}  // namespace eecdma
