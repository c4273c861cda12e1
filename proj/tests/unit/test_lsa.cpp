#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "eecdma/channel.hpp"
#include "eecdma/error.hpp"
#include "eecdma/game.hpp"
#include "eecdma/lsa.hpp"
#include "eecdma/model.hpp"

namespace eecdma {
namespace {

LsaInputs base_inputs(double alpha, int K) {
  LsaInputs in;
  in.alpha = alpha;
  in.noise_half_psd = 5e-10;
  in.gamma_target = target_sinr(120);
  in.p_max = 3.1622776601683794e-3;
  in.K = K;
  in.inv_cdf = [](double) { return 1e-6; };
  in.packet_len = 120;
  return in;
}

// Half the population strong, half weak enough to hit the power cap.
LsaInputs two_point_inputs(double p_max) {
  LsaInputs in = base_inputs(0.5, 10);
  in.p_max = p_max;
  in.inv_cdf = [](double y) { return y >= 0.5 ? 1e-3 : 1e-7; };
  return in;
}

TEST(EqualPower, ReceivePowerOracle) {
  const LsaInputs in = base_inputs(0.5, 8);
  EXPECT_NEAR(equal_power_receive_power(in), 5.919406310645403e-9, 1e-12 * 5.92e-9);
  EXPECT_NEAR(equal_power_pc(in, 1e-6), 5.919406310645403e-3, 1e-12 * 5.92e-3);
}

TEST(EqualPower, InfeasibleLoadThrows) {
  const LsaInputs in = base_inputs(2.0, 8);
  EXPECT_THROW(equal_power_receive_power(in), InfeasibleLoad);
  EXPECT_THROW(solve_receive_power(in, 0), InfeasibleLoad);
}

TEST(EqualPower, MatchesAsymptoticSinrAtCommonPower) {
  const LsaInputs in = base_inputs(0.75, 12);
  const double P = equal_power_receive_power(in);
  const std::vector<double> others(50, P);
  EXPECT_NEAR(asymptotic_sinr(P, in, others), in.gamma_target, 1e-12 * in.gamma_target);
}

TEST(AsymptoticSinr, IncreasesWithOwnPower) {
  const LsaInputs in = base_inputs(0.5, 10);
  const std::vector<double> others{1e-9, 5e-9, 2e-8};
  double prev = 0.0;
  for (double p = 1e-10; p < 1e-7; p *= 2.0) {
    const double g = asymptotic_sinr(p, in, others);
    EXPECT_GT(g, prev);
    prev = g;
  }
}

TEST(EstimateU2, CountsCappedQuantiles) {
  EXPECT_EQ(estimate_u2(two_point_inputs(3.1622776601683794e-3)), 5);
  EXPECT_EQ(estimate_u2(two_point_inputs(1e3)), 0);
  EXPECT_EQ(estimate_u2(two_point_inputs(1e-12)), 10);
}

TEST(SolveReceivePower, ZeroCappedIsClosedForm) {
  const LsaInputs in = two_point_inputs(1e3);
  EXPECT_EQ(solve_receive_power(in, 0), equal_power_receive_power(in));
}

TEST(SolveReceivePower, SolvesEquation) {
  const LsaInputs in = two_point_inputs(3.1622776601683794e-3);
  for (int u2 = 0; u2 <= 5; ++u2) {
    const double P = solve_receive_power(in, u2);
    EXPECT_GT(P, 0.0);
    EXPECT_NEAR(receive_power_residual(in, u2, P), 0.0, 1e-12) << "u2=" << u2;
  }
}

TEST(SolveReceivePower, CappedInterferenceLowersRequirement) {
  // Capped users interfere less than equal-power users would.
  const LsaInputs in = two_point_inputs(3.1622776601683794e-3);
  EXPECT_LT(solve_receive_power(in, 5), equal_power_receive_power(in));
}

TEST(SolveReceivePower, UnreachableTarget) {
  LsaInputs in = base_inputs(1.1, 20);
  in.inv_cdf = [](double y) { return y >= 0.5 ? 1e-3 : 1e-7; };
  in.gamma_target = 20.0;
  EXPECT_THROW(solve_receive_power(in, 0), InfeasibleLoad);
  EXPECT_THROW(solve_receive_power(in, 21), InvalidArgument);
}

TEST(DistributedPower, InvertsOwnGainUpToCap) {
  const LsaInputs in = two_point_inputs(3.1622776601683794e-3);
  const double P = solve_receive_power(in, estimate_u2(in));
  EXPECT_NEAR(distributed_power(in, 1e-3), P / 1e-3, 1e-15);
  EXPECT_EQ(distributed_power(in, 1e-12), in.p_max);
  Eigen::VectorXd h(3);
  h << 1e-3, 1e-12, 0.0;
  const Eigen::VectorXd p = distributed_powers(in, h);
  EXPECT_DOUBLE_EQ(p[0], distributed_power(in, 1e-3));
  EXPECT_EQ(p[1], in.p_max);
  EXPECT_EQ(p[2], in.p_max);
}

TEST(ProfileMmse, UncappedRanksHitTargetCappedRanksFallShort) {
  const LsaInputs in = two_point_inputs(3.1622776601683794e-3);
  const LsaPrediction pred = profile_mmse(in);
  const std::vector<double> q = rank_quantiles(in);
  int capped = 0;
  for (int i = 0; i < in.K; ++i) {
    if (pred.powers[i] == in.p_max) {
      ++capped;
      EXPECT_LT(pred.sinrs[i], in.gamma_target);
    } else {
      EXPECT_EQ(pred.sinrs[i], in.gamma_target);
      EXPECT_NEAR(pred.powers[i] * q[static_cast<std::size_t>(i)], pred.receive_power, 1e-12 * pred.receive_power);
    }
  }
  EXPECT_EQ(capped, pred.u2);
  EXPECT_EQ(pred.u2, 5);
  const double expected = in.rate * efficiency(pred.sinrs[0], 120) / pred.powers[0];
  EXPECT_NEAR(pred.utilities[0], expected, 1e-12 * expected);
}

TEST(ProfileMmse, CappedSinrSolvesFixedPoint) {
  const LsaInputs in = two_point_inputs(3.1622776601683794e-3);
  const std::vector<double> q = rank_quantiles(in);
  const int u2 = 5;
  const double P = solve_receive_power(in, u2);
  const int i = 8;
  const double xi = capped_user_sinr(in, q, u2, P, i, in.p_max);
  const double Q = in.p_max * q[i - 1];
  const double N = in.processing_gain();
  double interference = (in.K - u2) / N * Q * P / (Q + P * xi);
  for (int j = in.K - u2 + 1; j <= in.K; ++j) {
    if (j == i) continue;
    const double c = in.p_max * q[static_cast<std::size_t>(j - 1)];
    interference += Q * c / (Q + c * xi) / N;
  }
  EXPECT_NEAR(xi, Q / (in.noise_half_psd + interference), 1e-12 * xi);
}

TEST(ProfileOrthogonal, NoiseLimited) {
  const LsaInputs in = two_point_inputs(3.1622776601683794e-3);
  const LsaPrediction pred = profile_orthogonal(in);
  const double P = in.gamma_target * in.noise_half_psd;
  EXPECT_EQ(pred.receive_power, P);
  EXPECT_NEAR(pred.powers[0], P / 1e-3, 1e-20);
  EXPECT_EQ(pred.powers[9], in.p_max);
  EXPECT_NEAR(pred.sinrs[9], in.p_max * 1e-7 / in.noise_half_psd, 1e-12);
}

TEST(Wbe, ReceivePowerOracle) {
  const double g = target_sinr(120);
  EXPECT_NEAR(wbe_receive_power(g, 70.0 / 64.0, 5e-10), 8.969592518174008e-9, 1e-12 * 8.97e-9);
  EXPECT_THROW(wbe_receive_power(g, 1.0 + 1.0 / g, 5e-10), InfeasibleLoad);
}

TEST(Wbe, ProfileIsEqualReceivedPower) {
  ChannelModel model;
  SystemConfig cfg;
  cfg.N = 64;
  cfg.K = 70;
  const LsaInputs in = make_lsa_inputs(cfg, model);
  EXPECT_DOUBLE_EQ(in.alpha, 70.0 / 64.0);
  const LsaPrediction pred = profile_wbe(in);
  const std::vector<double> q = rank_quantiles(in);
  for (int i = 0; i + 1 < in.K; ++i) {
    EXPECT_NEAR(pred.powers[i] * q[static_cast<std::size_t>(i)], pred.receive_power, 1e-12 * pred.receive_power);
    EXPECT_EQ(pred.sinrs[i], in.gamma_target);
  }
  EXPECT_TRUE(std::isinf(pred.powers[in.K - 1]));
  EXPECT_EQ(pred.utilities[in.K - 1], 0.0);
}

TEST(Social, RootOracles) {
  EXPECT_NEAR(social_optimum_sinr(base_inputs(70.0 / 64.0, 70), 120), 5.764892508465610, 1e-12 * 5.77);
  EXPECT_NEAR(social_optimum_sinr(base_inputs(1.5, 70), 120), 1.948522447508535, 1e-12 * 1.95);
  EXPECT_NEAR(social_optimum_sinr(base_inputs(1.0, 70), 120), target_sinr(120), 1e-12 * 6.69);
}

TEST(Social, MaximizesEfficiencyPerReceivedPower) {
  const LsaInputs in = base_inputs(70.0 / 64.0, 70);
  const double gs = social_optimum_sinr(in, 120);
  const auto score = [&](double g) { return efficiency(g, 120) / wbe_receive_power(g, in.alpha, in.noise_half_psd); };
  const double best = score(gs);
  const double upper = 1.0 / (in.alpha - 1.0);
  for (double g = 0.05; g < upper; g += 0.01) EXPECT_LE(score(g), best * (1.0 + 1e-12)) << g;
}

TEST(Social, ProfileSumBeatsGameTarget) {
  ChannelModel model;
  SystemConfig cfg;
  cfg.N = 64;
  cfg.K = 70;
  const LsaInputs in = make_lsa_inputs(cfg, model);
  const LsaPrediction social = profile_social(in);
  const LsaPrediction wbe = profile_wbe(in);
  EXPECT_GT(social.utilities.sum(), wbe.utilities.sum());
  EXPECT_LT(social.receive_power, wbe.receive_power);
}

TEST(Social, Errors) {
  EXPECT_THROW(social_optimum_sinr(base_inputs(1.0, 4), 1), InvalidArgument);
  LsaInputs bad = base_inputs(1.0, 4);
  bad.alpha = 0.0;
  EXPECT_THROW(social_optimum_sinr(bad, 120), InvalidArgument);
}

TEST(LsaInputs, Validation) {
  LsaInputs in = base_inputs(0.5, 4);
  in.inv_cdf = nullptr;
  EXPECT_THROW(in.validate(), InvalidArgument);
  in = base_inputs(0.5, 0);
  EXPECT_THROW(in.validate(), InvalidArgument);
}

TEST(RankQuantiles, StrongestFirst) {
  ChannelModel model;
  SystemConfig cfg;
  cfg.K = 20;
  const LsaInputs in = make_lsa_inputs(cfg, model);
  const std::vector<double> q = rank_quantiles(in);
  EXPECT_EQ(q, sorted_gain_quantiles(model, 20));
  EXPECT_EQ(q.back(), 0.0);
}

}  // namespace
}  // namespace eecdma
