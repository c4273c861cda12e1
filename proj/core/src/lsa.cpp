#include "eecdma/lsa.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "eecdma/error.hpp"
#include "eecdma/game.hpp"
#include "eecdma/model.hpp"
#include "eecdma/roots.hpp"

namespace eecdma {
namespace {

void check_feasible(double alpha, double gamma) {
  if (!(alpha < 1.0 + 1.0 / gamma)) throw InfeasibleLoad("infeasible load: alpha >= 1 + 1/gamma");
}

double rank_utility(const LsaInputs& in, double psi, double xi) {
  if (!std::isfinite(psi)) return 0.0;
  return in.rate * in.info_ratio * efficiency(xi, in.packet_len) / psi;
}

void fill_utilities(const LsaInputs& in, LsaPrediction& out) {
  out.utilities.resize(in.K);
  for (int i = 0; i < in.K; ++i) out.utilities[i] = rank_utility(in, out.powers[i], out.sinrs[i]);
}

// Equal received power profile at SINR gamma (no cap).
LsaPrediction equal_received(const LsaInputs& in, double receive_power, double gamma) {
  const std::vector<double> q = rank_quantiles(in);
  LsaPrediction out;
  out.receive_power = receive_power;
  out.powers.resize(in.K);
  out.sinrs = Eigen::VectorXd::Constant(in.K, gamma);
  for (int i = 0; i < in.K; ++i) {
    const double qi = q[static_cast<std::size_t>(i)];
    out.powers[i] = qi > 0.0 ? receive_power / qi : std::numeric_limits<double>::infinity();
  }
  fill_utilities(in, out);
  return out;
}

}  // namespace

void LsaInputs::validate() const {
  if (!(alpha > 0.0)) throw InvalidArgument("LsaInputs: alpha must be > 0");
  if (!(noise_half_psd > 0.0)) throw InvalidArgument("LsaInputs: noise_half_psd must be > 0");
  if (!(gamma_target > 0.0)) throw InvalidArgument("LsaInputs: gamma_target must be > 0");
  if (!(p_max > 0.0)) throw InvalidArgument("LsaInputs: p_max must be > 0");
  if (K < 1) throw InvalidArgument("LsaInputs: K must be >= 1");
  if (!inv_cdf) throw InvalidArgument("LsaInputs: inv_cdf missing");
  if (!(rate > 0.0) || !(info_ratio > 0.0) || packet_len < 1) throw InvalidArgument("LsaInputs: bad utility constants");
}

LsaInputs make_lsa_inputs(const SystemConfig& cfg, const ChannelModel& model) {
  cfg.validate();
  model.validate();
  LsaInputs in;
  in.alpha = static_cast<double>(cfg.K) / static_cast<double>(cfg.N);
  in.noise_half_psd = cfg.noise_var();
  in.gamma_target = target_sinr(cfg.M);
  in.p_max = cfg.p_max;
  in.K = cfg.K;
  in.inv_cdf = [model](double y) { return inv_cdf_sq_gain(model, y); };
  in.rate = cfg.R;
  in.info_ratio = cfg.info_ratio();
  in.packet_len = cfg.M;
  return in;
}

std::vector<double> rank_quantiles(const LsaInputs& in) {
  in.validate();
  std::vector<double> q(static_cast<std::size_t>(in.K));
  for (int i = 1; i <= in.K; ++i) {
    q[static_cast<std::size_t>(i - 1)] = in.inv_cdf(static_cast<double>(in.K - i) / in.K);
  }
  return q;
}

double asymptotic_sinr(double p_received, const LsaInputs& in, const std::vector<double>& interferer_powers) {
  if (!(p_received > 0.0) || !std::isfinite(p_received)) throw InvalidArgument("asymptotic_sinr: received power must be > 0");
  if (!(in.alpha >= 0.0) || !(in.noise_half_psd > 0.0)) throw InvalidArgument("asymptotic_sinr: bad inputs");
  const double n = interferer_powers.empty() ? 1.0 : static_cast<double>(interferer_powers.size());
  const auto excess = [&](double g) {
    double mean = 0.0;
    for (double pj : interferer_powers) mean += pj * p_received / (p_received + pj * g);
    return g * (in.noise_half_psd + in.alpha * mean / n) - p_received;
  };
  const double hi = p_received / in.noise_half_psd;
  if (excess(hi) < 0.0) throw InfeasibleLoad("load infeasible");
  return roots::bisect(excess, 0.0, hi, 1e-15);
}

double equal_power_receive_power(const LsaInputs& in) {
  in.validate();
  check_feasible(in.alpha, in.gamma_target);
  const double g = in.gamma_target;
  return g * in.noise_half_psd / (1.0 - in.alpha * g / (1.0 + g));
}

double equal_power_pc(const LsaInputs& in, double h_sq) {
  if (!(h_sq > 0.0)) throw InvalidArgument("equal_power_pc: h_sq must be > 0");
  return equal_power_receive_power(in) / h_sq;
}

int estimate_u2(const LsaInputs& in) {
  const double P = equal_power_receive_power(in);
  int count = 0;
  for (double q : rank_quantiles(in)) {
    if (q <= 0.0 || P / q > in.p_max) ++count;
  }
  return count;
}

double receive_power_residual(const LsaInputs& in, int u2, double P) {
  const std::vector<double> q = rank_quantiles(in);
  const double g = in.gamma_target;
  const double N = in.processing_gain();
  double denom = N * in.noise_half_psd + (in.K - u2) * P / (1.0 + g);
  for (int i = in.K - u2 + 1; i <= in.K; ++i) {
    const double c = in.p_max * q[static_cast<std::size_t>(i - 1)];
    if (c > 0.0) denom += P * c / (P + c * g);
  }
  return N * P / denom / g - 1.0;
}

double solve_receive_power(const LsaInputs& in, int u2) {
  in.validate();
  if (u2 < 0 || u2 > in.K) throw InvalidArgument("solve_receive_power: u2 outside [0, K]");
  if (u2 == 0) return equal_power_receive_power(in);
  const std::vector<double> q = rank_quantiles(in);
  const double g = in.gamma_target;
  const double N = in.processing_gain();
  const int u1 = in.K - u2;
  if (!(N > g * u1 / (1.0 + g))) throw InfeasibleLoad("target unreachable");
  std::vector<double> c;
  for (int i = u1 + 1; i <= in.K; ++i) {
    const double ci = in.p_max * q[static_cast<std::size_t>(i - 1)];
    if (ci > 0.0) c.push_back(ci);
  }
  // Convex in P, negative at zero: one positive root.
  const auto G = [&](double P) {
    double capped = 0.0;
    for (double ci : c) capped += P * ci / (P + ci * g);
    return N * P - g * (N * in.noise_half_psd + u1 * P / (1.0 + g) + capped);
  };
  const double scale = g * in.noise_half_psd;
  const double hi = roots::expand_upper(G, 0.0, scale);
  return roots::bisect(G, 0.0, hi, 1e-15);
}

double distributed_power(const LsaInputs& in, double h_sq_own) {
  const double P = solve_receive_power(in, estimate_u2(in));
  if (!(h_sq_own > 0.0)) return in.p_max;
  return std::min(P / h_sq_own, in.p_max);
}

Eigen::VectorXd distributed_powers(const LsaInputs& in, const Eigen::VectorXd& h_sq) {
  const double P = solve_receive_power(in, estimate_u2(in));
  Eigen::VectorXd p(h_sq.size());
  for (Eigen::Index k = 0; k < h_sq.size(); ++k) {
    p[k] = h_sq[k] > 0.0 ? std::min(P / h_sq[k], in.p_max) : in.p_max;
  }
  return p;
}

double capped_user_sinr(const LsaInputs& in, const std::vector<double>& quantiles, int u2, double P, int i,
                        double psi_i) {
  const double Q = psi_i * quantiles[static_cast<std::size_t>(i - 1)];
  if (!(Q > 0.0)) return 0.0;
  const double N = in.processing_gain();
  const double sigma = in.noise_half_psd;
  const auto excess = [&](double xi) {
    double interference = (in.K - u2) / N * Q * P / (Q + P * xi);
    for (int j = in.K - u2 + 1; j <= in.K; ++j) {
      if (j == i) continue;
      const double c = in.p_max * quantiles[static_cast<std::size_t>(j - 1)];
      interference += Q * c / (Q + c * xi) / N;
    }
    return xi * (sigma + interference) - Q;
  };
  const double hi = Q / sigma;
  const double xi = roots::bisect(excess, 0.0, hi, 1e-15);
  if (!std::isfinite(xi)) throw NumericalError("capped SINR did not converge for rank " + std::to_string(i));
  return xi;
}

LsaPrediction profile_mmse(const LsaInputs& in) {
  const std::vector<double> q = rank_quantiles(in);
  const int u2 = estimate_u2(in);
  const double P = solve_receive_power(in, u2);
  LsaPrediction out;
  out.receive_power = P;
  out.powers.resize(in.K);
  out.sinrs.resize(in.K);
  for (int i = 1; i <= in.K; ++i) {
    const double qi = q[static_cast<std::size_t>(i - 1)];
    const bool capped = qi <= 0.0 || P / qi >= in.p_max;
    const double psi = capped ? in.p_max : P / qi;
    out.powers[i - 1] = psi;
    out.sinrs[i - 1] = capped ? capped_user_sinr(in, q, u2, P, i, psi) : in.gamma_target;
    if (capped) ++out.u2;
  }
  fill_utilities(in, out);
  return out;
}

LsaPrediction profile_orthogonal(const LsaInputs& in) {
  const std::vector<double> q = rank_quantiles(in);
  const double P = in.gamma_target * in.noise_half_psd;
  LsaPrediction out;
  out.receive_power = P;
  out.powers.resize(in.K);
  out.sinrs.resize(in.K);
  for (int i = 0; i < in.K; ++i) {
    const double qi = q[static_cast<std::size_t>(i)];
    const bool capped = qi <= 0.0 || P / qi >= in.p_max;
    out.powers[i] = capped ? in.p_max : P / qi;
    out.sinrs[i] = capped ? in.p_max * qi / in.noise_half_psd : in.gamma_target;
    if (capped) ++out.u2;
  }
  fill_utilities(in, out);
  return out;
}

double wbe_receive_power(double gamma, double alpha, double noise_half_psd) {
  check_feasible(alpha, gamma);
  return gamma * noise_half_psd / (1.0 + gamma * (1.0 - alpha));
}

LsaPrediction profile_wbe(const LsaInputs& in) {
  in.validate();
  return equal_received(in, wbe_receive_power(in.gamma_target, in.alpha, in.noise_half_psd), in.gamma_target);
}

double social_optimum_sinr(const LsaInputs& in, int M, double rel_tol) {
  if (M < 2) throw InvalidArgument("social_optimum_sinr: M must be >= 2");
  if (!(in.alpha > 0.0)) throw InvalidArgument("social_optimum_sinr: alpha must be > 0");
  const double m = static_cast<double>(M);
  const double a = in.alpha;
  const auto h = [m, a](double g) { return std::expm1(g) - m * g * (1.0 - g * (a - 1.0)); };
  double hi = 1.0;
  if (a > 1.0) {
    // h > 0 where the bracket term vanishes, so the root lies below it.
    hi = 1.0 / (a - 1.0);
  } else {
    hi = roots::expand_upper(h, 1e-12, hi);
  }
  const double g = roots::bisect(h, 1e-12, hi, rel_tol);
  if (!(a < 1.0 + 1.0 / g)) throw InfeasibleLoad("no feasible social optimum");
  return g;
}

LsaPrediction profile_social(const LsaInputs& in) {
  in.validate();
  const double g = social_optimum_sinr(in, in.packet_len);
  return equal_received(in, wbe_receive_power(g, in.alpha, in.noise_half_psd), g);
}

}  // namespace eecdma
