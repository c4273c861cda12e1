#include "eecdma/channel.hpp"

#include <cmath>
#include <random>

#include "eecdma/error.hpp"
#include "eecdma/roots.hpp"

namespace eecdma {
namespace {

// Uniform double in (0, 1) from the top 53 bits, identical on every platform.
double open_unit(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

std::mt19937_64 trial_engine(std::uint64_t seed, std::uint64_t trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)};
  return std::mt19937_64(seq);
}

double rayleigh_amplitude(std::mt19937_64& rng, double distance, double n_exp) {
  const double mean = std::pow(distance, -0.5 * n_exp);
  const double scale = mean * std::sqrt(2.0 / std::numbers::pi);
  return scale * std::sqrt(-2.0 * std::log(open_unit(rng)));
}

std::vector<double> scaled_grid_weights(const ChannelModel& model) {
  const double delta = (model.r_b - model.r_a) / model.partitions;
  std::vector<double> w(static_cast<std::size_t>(model.partitions));
  for (int i = 1; i <= model.partitions; ++i) {
    const double d = model.r_a + i * delta;
    w[static_cast<std::size_t>(i - 1)] = std::pow(d, model.n_exp) / kRayleighPowerAtUnitDistance;
  }
  return w;
}

}  // namespace

void ChannelModel::validate() const {
  if (!(r_a > 0.0) || !(r_b > r_a)) throw InvalidArgument("ChannelModel: need 0 < r_a < r_b");
  if (!(n_exp >= 2.0 && n_exp <= 5.0)) throw InvalidArgument("ChannelModel: n_exp must lie in [2, 5]");
  if (partitions < 2) throw InvalidArgument("ChannelModel: partitions must be >= 2");
}

Realization sample(const ChannelModel& model, const SystemConfig& cfg, std::uint64_t trial) {
  model.validate();
  auto rng = trial_engine(model.seed, trial);
  Realization out;
  out.distances.resize(cfg.K);
  out.gains.resize(cfg.K);
  for (int k = 0; k < cfg.K; ++k) {
    out.distances[k] = model.r_a + (model.r_b - model.r_a) * open_unit(rng);
  }
  for (int k = 0; k < cfg.K; ++k) {
    out.gains[k] = rayleigh_amplitude(rng, out.distances[k], model.n_exp);
  }
  const double chip = 1.0 / std::sqrt(static_cast<double>(cfg.N));
  out.codes.resize(cfg.N, cfg.K);
  for (int k = 0; k < cfg.K; ++k) {
    for (int n = 0; n < cfg.N; ++n) out.codes(n, k) = (rng() >> 63) ? chip : -chip;
  }
  return out;
}

Eigen::MatrixXd sample_multicell_gains(const ChannelModel& model, const SystemConfig& cfg, int num_aps,
                                       std::uint64_t trial) {
  if (num_aps < 1) throw InvalidArgument("sample_multicell_gains: need at least one AP");
  Eigen::MatrixXd gains(num_aps, cfg.K);
  gains.row(0) = sample(model, cfg, trial).gains.transpose();
  if (num_aps == 1) return gains;
  // Links to the other APs come from a derived stream so row 0 stays
  // identical to the single-cell draw.
  auto rng = trial_engine(model.seed ^ 0x9e3779b97f4a7c15ULL, trial);
  for (int b = 1; b < num_aps; ++b) {
    for (int k = 0; k < cfg.K; ++k) {
      const double d = model.r_a + (model.r_b - model.r_a) * open_unit(rng);
      gains(b, k) = rayleigh_amplitude(rng, d, model.n_exp);
    }
  }
  return gains;
}

double cdf_sq_gain(const ChannelModel& model, double x) {
  if (!(x > 0.0)) return 0.0;
  if (std::isinf(x)) return 1.0;
  double sum = 0.0;
  for (const double w : scaled_grid_weights(model)) sum += std::exp(-x * w);
  return 1.0 - sum / model.partitions;
}

double cdf_sq_gain_closed_form(const ChannelModel& model, double x) {
  if (model.n_exp != 2.0) throw InvalidArgument("closed-form CDF only exists for n = 2");
  if (!(x > 0.0)) return 0.0;
  const double xs = x / kRayleighPowerAtUnitDistance;
  const double root = std::sqrt(xs);
  const double bracket = 0.5 * std::erfc(model.r_a * root) - 0.5 * std::erfc(model.r_b * root);
  return 1.0 - std::sqrt(std::numbers::pi / xs) * bracket / (model.r_b - model.r_a);
}

double inverse_cdf_z_sum(const ChannelModel& model, double z) {
  double sum = 0.0;
  for (const double w : scaled_grid_weights(model)) sum += std::pow(z, w);
  return sum;
}

double inv_cdf_sq_gain(const ChannelModel& model, double y) {
  if (!(y >= 0.0) || y >= 1.0) throw InvalidArgument("inv_cdf_sq_gain: y must lie in [0, 1)");
  if (y == 0.0) return 0.0;
  // sum_i z^{w_i} = (1 - y) P with z = e^{-x}; solved for x = -ln z directly so
  // small x keeps full relative precision.
  const auto weights = scaled_grid_weights(model);
  const double target = (1.0 - y) * model.partitions;
  auto excess = [&](double x) {
    double sum = 0.0;
    for (const double w : weights) sum += std::exp(-x * w);
    return target - sum;  // increasing in x
  };
  const double hi = roots::expand_upper(excess, 0.0, 1.0 / weights.back());
  return roots::bisect(excess, 0.0, hi, 1e-15);
}

std::vector<double> sorted_gain_quantiles(const ChannelModel& model, int K) {
  if (K < 1) throw InvalidArgument("sorted_gain_quantiles: K must be >= 1");
  std::vector<double> q(static_cast<std::size_t>(K));
  for (int l = 1; l <= K; ++l) {
    q[static_cast<std::size_t>(l - 1)] =
        inv_cdf_sq_gain(model, static_cast<double>(K - l) / static_cast<double>(K));
  }
  return q;
}

}  // namespace eecdma
