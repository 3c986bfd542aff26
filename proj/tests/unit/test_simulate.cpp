#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "smdet/results.hpp"
#include "smdet/simulate.hpp"
#include "test_util.hpp"

using namespace smdet;

namespace {

Scenario base_scenario(EstimatorKind est, std::vector<DetectorKind> dets) {
  Scenario s;
  s.cfg.n_tx = 2;
  s.cfg.n_rx = 2;
  s.cfg.block_len = 2;
  s.cfg.mod_order = 2;
  s.cfg.frame_len = 5;
  s.cfg.doppler = 0.01;
  s.spatial = SpatialModel::exponential(0.5, 0.5);
  s.estimator = est;
  s.detectors = std::move(dets);
  s.snr_db = {0.0, 6.0};
  s.stop = {50, 200000};
  s.seed = 99;
  return s;
}

}  // namespace

TEST(Window, MbDataBlockCount) {
  const Scenario s = base_scenario(EstimatorKind::MB, {DetectorKind::CeeaMlMb});
  const SnrPoint pt(s, 5.0);
  EXPECT_EQ(pt.data_blocks(), (std::vector<int>{1, 2, 3, 4, 6, 7, 8, 9}));
  RngStream rng(1);
  WindowTrace tr;
  const WindowOutcome w = pt.run_window(rng, &tr);
  EXPECT_EQ(w.errors[0].size(), 8u);
  EXPECT_EQ(tr.channels.size(), 11u);
  EXPECT_EQ(tr.sent.size(), 8u);

  const Scenario d = base_scenario(EstimatorKind::DD, {DetectorKind::CeeaMlDd});
  EXPECT_EQ(SnrPoint(d, 5.0).data_blocks(), (std::vector<int>{1, 2, 3, 4}));
}

TEST(Window, NoiselessPerfectEstimatorHasNoErrors) {
  Scenario s = base_scenario(EstimatorKind::Perfect, {DetectorKind::PerfectCSI});
  s.cfg.mod_order = 8;
  const SnrPoint pt(s, 150.0);
  RngStream rng(2);
  for (int t = 0; t < 200; ++t) {
    const WindowOutcome w = pt.run_window(rng);
    for (int e : w.errors[0]) EXPECT_EQ(e, 0);
  }
}

TEST(Window, StaticHighSnrMbHasNoErrors) {
  Scenario s = base_scenario(EstimatorKind::MB, {DetectorKind::CeeaMlMb, DetectorKind::TwoStageMb,
                                                 DetectorKind::Mismatched});
  s.temporal.kind = TemporalKind::Static;
  const SnrPoint pt(s, 60.0);
  RngStream rng(3);
  for (int t = 0; t < 100; ++t) {
    const WindowOutcome w = pt.run_window(rng);
    for (const auto& per_det : w.errors)
      for (int e : per_det) EXPECT_EQ(e, 0);
  }
}

TEST(Window, DdFirstBlockUsesScaledPilot) {
  Scenario s = base_scenario(EstimatorKind::DD, {DetectorKind::CeeaMlDd, DetectorKind::Mismatched});
  s.cfg.pilot_power = 2.0;
  const SnrPoint pt(s, 10.0);
  RngStream rng(4);
  WindowTrace tr;
  pt.run_window(rng, &tr);
  const CMatrix want = tr.observations[0] / std::sqrt(2.0);
  for (std::size_t d = 0; d < 2; ++d) EXPECT_LT((tr.h_used[d][0] - want).norm(), 1e-15);
  // and Y(0) is the pilot observation H(0) sqrt(eps_p) I + Z
  EXPECT_LT((tr.observations[0] - tr.channels[0] * std::sqrt(2.0)).norm(), 10.0);
}

TEST(Window, PerfectCsiDetectorSeesTrueChannel) {
  const Scenario s = base_scenario(EstimatorKind::MB, {DetectorKind::PerfectCSI, DetectorKind::CeeaMlMb});
  const SnrPoint pt(s, 10.0);
  RngStream rng(5);
  WindowTrace tr;
  pt.run_window(rng, &tr);
  const auto& k = pt.data_blocks();
  for (std::size_t b = 0; b < k.size(); ++b) EXPECT_EQ(tr.h_used[0][b], tr.channels[k[b]]);
}

TEST(Sweep, AccountingAndStopRule) {
  const Scenario s = base_scenario(EstimatorKind::MB, {DetectorKind::CeeaMlMb, DetectorKind::Mismatched});
  const BerCurve c = run_sweep(s);
  ASSERT_EQ(c.points.size(), 4u);
  for (const CurvePoint& p : c.points) {
    std::int64_t e = 0, b = 0;
    for (const auto& [k, cnt] : p.per_k) {
      e += cnt.errors;
      b += cnt.bits;
      EXPECT_LE(cnt.errors, cnt.bits);
    }
    EXPECT_EQ(e, p.total.errors);
    EXPECT_EQ(b, p.total.bits);
    EXPECT_EQ(p.total.bits, p.windows * 8 * 4);
    EXPECT_TRUE(p.total.errors >= 50 || p.budget_exceeded);
  }
  // detector-major order
  EXPECT_EQ(c.points[0].detector, DetectorKind::CeeaMlMb);
  EXPECT_EQ(c.points[1].snr_db, 6.0);
}

TEST(Sweep, BudgetExceededIsReported) {
  Scenario s = base_scenario(EstimatorKind::MB, {DetectorKind::CeeaMlMb});
  s.snr_db = {30.0};
  s.temporal.kind = TemporalKind::Static;
  s.stop = {1000, 3200};
  const BerCurve c = run_sweep(s);
  const CurvePoint& p = c.points[0];
  EXPECT_TRUE(p.budget_exceeded);
  EXPECT_GE(p.total.bits, 3200);
  EXPECT_LT(p.total.bits, 3200 + 32);
}

TEST(Sweep, DeterministicAcrossRunsAndWorkers) {
  Scenario s = base_scenario(EstimatorKind::DD, {DetectorKind::CeeaMlDd, DetectorKind::ZrcDd});
  const std::string a = format_results(run_sweep(s));
  const std::string b = format_results(run_sweep(s));
  SweepOptions opts;
  opts.workers = 3;
  const std::string c = format_results(run_sweep(s, opts));
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
  s.seed = 100;
  EXPECT_NE(a, format_results(run_sweep(s)));
}

TEST(Sweep, PerfectCsiMatchesIndependentSimulator) {
  Scenario s = base_scenario(EstimatorKind::Perfect, {DetectorKind::PerfectCSI});
  s.cfg.block_len = 1;
  // one data block per window keeps the errors independent, as the binomial CI assumes
  s.cfg.frame_len = 2;
  s.spatial = SpatialModel::exponential(0.0, 0.0);
  s.snr_db = {0.0, 4.0, 8.0};
  s.stop = {3000, 4000000};
  const BerCurve c = run_sweep(s);
  std::uint64_t seed = 5000;
  for (double snr : s.snr_db) {
    const CurvePoint& p = c.at(DetectorKind::PerfectCSI, snr);
    const double ours = static_cast<double>(p.total.errors) / p.total.bits;
    const auto [e, n] = oracle::brute_perfect_csi_sm(2, 2, snr, 400000, seed++);
    const double ref = static_cast<double>(e) / n;
    const Interval a = wilson_interval(p.total.errors, p.total.bits);
    const Interval b = wilson_interval(e, n);
    EXPECT_TRUE(a.low <= b.high && b.low <= a.high) << snr << " dB: " << ours << " vs " << ref;
  }
}

TEST(Sweep, DdBerTrendsUpWithBlockIndex) {
  Scenario s = base_scenario(EstimatorKind::DD, {DetectorKind::CeeaMlDd});
  s.cfg.frame_len = 10;
  s.cfg.mod_order = 4;
  s.cfg.mod_kind = ModKind::QAM;
  s.cfg.n_rx = 4;
  s.spatial = SpatialModel::exponential(0.8, 0.8);
  s.snr_db = {10.0};
  s.stop = {1'000'000'000, 9 * 1'000'000};
  const BerCurve curve = run_sweep(s);
  const CurvePoint& p = curve.points[0];
  std::vector<double> ber;
  for (const auto& [k, c] : p.per_k) {
    EXPECT_GE(c.bits, 1'000'000);
    ber.push_back(static_cast<double>(c.errors) / c.bits);
  }
  ASSERT_EQ(ber.size(), 9u);
  std::vector<double> rank(ber.size());
  std::vector<int> order(ber.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return ber[a] < ber[b]; });
  for (std::size_t i = 0; i < order.size(); ++i) rank[order[i]] = static_cast<double>(i);
  const double n = static_cast<double>(ber.size());
  double d2 = 0.0;
  for (std::size_t i = 0; i < ber.size(); ++i) d2 += (rank[i] - i) * (rank[i] - i);
  const double spearman = 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
  EXPECT_GE(spearman, 0.0) << spearman;
}
