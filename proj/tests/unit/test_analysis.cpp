#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "smdet/analysis.hpp"
#include "smdet/linalg.hpp"
#include "test_util.hpp"

using namespace smdet;
using testutil::code_of;

namespace {

CMatrix exp_matrix(int n, double c) {
  CMatrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = std::pow(c, std::abs(i - j));
  return m;
}

SystemConfig small_cfg(double noise) {
  SystemConfig cfg;
  cfg.n_tx = 2;
  cfg.n_rx = 2;
  cfg.block_len = 2;
  cfg.mod_order = 2;
  cfg.frame_len = 5;
  cfg.doppler = 0.03;
  cfg.noise_var = noise;
  return cfg;
}

SpatialCorrelation corr() { return kronecker_correlation(exp_matrix(2, 0.7), exp_matrix(2, 0.5)); }

CMatrix local_kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

CMatrix hermitian_sqrt(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m);
  return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().cast<cplx>().asDiagonal() *
         es.eigenvectors().adjoint();
}

CMatrix cn(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, std::sqrt(0.5));
  CMatrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = cplx(n(rng), n(rng));
  return m;
}

}  // namespace

TEST(Pep, ConditionalMatchesDecisionFrequency) {
  const SystemConfig cfg = small_cfg(0.3);
  const SignalCodec codec(cfg);
  const std::vector<SignalBlock> all = codec.enumerate();
  std::mt19937_64 rng(21);
  int case_id = 0;
  for (EstimatorKind est : {EstimatorKind::MB, EstimatorKind::DD}) {
    const ConditionalModel m = make_model(est, ModelSide::Full, corr(), cfg, make_rho({}, cfg), 3);
    for (auto [i, j] : {std::pair{0, 1}, std::pair{0, 15}, std::pair{5, 10}}) {
      const CMatrix x = codec.matrix(all[i]), xa = codec.matrix(all[j]);
      const CMatrix hh = unvec(hermitian_sqrt(m.estimate_cov) * cn(4, 1, rng), 2, 2);
      const double p = pep_conditional(x, xa, hh, m);
      const std::int64_t draws = 60000;
      const double f = oracle::pairwise_decision_frequency(x, xa, hh, {m.A, m.K, m.noise_var}, draws,
                                                           1000 + case_id++);
      EXPECT_NEAR(p, f, 4.0 * oracle::binomial_se(f, draws) + 1e-4) << i << "->" << j;
    }
  }
}

TEST(Pep, EstimationErrorModelMatchesSampling) {
  // y = H_hat X + e with e ~ CN(0, sigma^2 I + (X^T (x) I) Psi_E (X^* (x) I)), metric from the model
  const SystemConfig cfg = small_cfg(0.3);
  const SignalCodec codec(cfg);
  const std::vector<SignalBlock> all = codec.enumerate();
  const ConditionalModel m = make_model(EstimatorKind::MB, ModelSide::Full, corr(), cfg, make_rho({}, cfg), 2);
  const oracle::VecModel vm{m.A, m.K, m.noise_var};
  std::mt19937_64 rng(22);
  const CMatrix x = codec.matrix(all[3]), xa = codec.matrix(all[6]);
  const CMatrix hh = unvec(hermitian_sqrt(m.estimate_cov) * cn(4, 1, rng), 2, 2);
  const CMatrix kx = local_kron(x.transpose(), CMatrix::Identity(2, 2));
  CMatrix cov = kx * m.error_cov * kx.adjoint();
  cov.diagonal().array() += m.noise_var;
  const CMatrix s = hermitian_sqrt(cov);
  const int draws = 40000;
  int flips = 0;
  for (int t = 0; t < draws; ++t) {
    const CVector y = vec(CMatrix(hh * x)) + s * cn(4, 1, rng).col(0);
    const CMatrix ym = unvec(y, 2, 2);
    flips += oracle::general_metric(ym, xa, hh, vm) < oracle::general_metric(ym, x, hh, vm);
  }
  const double f = static_cast<double>(flips) / draws;
  EXPECT_NEAR(pep_conditional(x, xa, hh, m, PepNoiseModel::EstimationError), f,
              4.0 * oracle::binomial_se(f, draws) + 1e-4);
}

TEST(Pep, Guards) {
  const SystemConfig cfg = small_cfg(0.3);
  const SignalCodec codec(cfg);
  const CMatrix x = codec.matrix(codec.enumerate()[0]);
  const ConditionalModel m = make_model(EstimatorKind::MB, ModelSide::Full, corr(), cfg, make_rho({}, cfg), 2);
  EXPECT_EQ(code_of([&] { pep_conditional(x, x, CMatrix::Ones(2, 2), m); }), ErrorCode::InvalidArgument);
  const ConditionalModel z = make_model(EstimatorKind::MB, ModelSide::Zrc, corr(), cfg, make_rho({}, cfg), 2);
  EXPECT_EQ(code_of([&] { PairwiseCase(x, -x, z); }), ErrorCode::InvalidArgument);
  RngStream rng(1);
  EXPECT_EQ(code_of([&] { pep_average(x, -x, m, 10, rng); }), ErrorCode::InvalidArgument);
}

TEST(Pep, MbConvenienceMatchesModel) {
  const SystemConfig cfg = small_cfg(0.2);
  const SignalCodec codec(cfg);
  const auto all = codec.enumerate();
  const RhoFn rho = make_rho({}, cfg);
  const ConditionalModel m = make_model(EstimatorKind::MB, ModelSide::Full, corr(), cfg, rho, 4);
  const CMatrix hh = CMatrix::Identity(2, 2) * cplx(0.6, 0.2);
  const double a = pep_conditional(codec.matrix(all[1]), codec.matrix(all[2]), hh, m);
  const double b = pep_conditional(codec.matrix(all[1]), codec.matrix(all[2]), 4, hh, cfg, corr().phi, rho);
  EXPECT_NEAR(a, b, 1e-10);
}

TEST(Pep, AverageMatchesIndependentMean) {
  const SystemConfig cfg = small_cfg(0.5);
  const SignalCodec codec(cfg);
  const auto all = codec.enumerate();
  const ConditionalModel m = make_model(EstimatorKind::DD, ModelSide::Full, corr(), cfg, make_rho({}, cfg), 1);
  const CMatrix x = codec.matrix(all[0]), xa = codec.matrix(all[9]);
  RngStream rng(31);
  const McEstimate e = pep_average(x, xa, m, 2000, rng);
  EXPECT_EQ(e.samples, 2000);

  std::mt19937_64 g(32);
  const CMatrix s = hermitian_sqrt(m.estimate_cov);
  double sum = 0.0, sq = 0.0;
  const int n = 2000;
  for (int i = 0; i < n; ++i) {
    const double p = pep_conditional(x, xa, unvec(s * cn(4, 1, g), 2, 2), m);
    sum += p;
    sq += p * p;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sq / n - mean * mean) / n);
  EXPECT_NEAR(e.mean, mean, 4.0 * std::hypot(se, e.std_error));

  RngStream r1(33), r2(33);
  const double se_small = pep_average(x, xa, m, 400, r1).std_error;
  const double se_large = pep_average(x, xa, m, 1600, r2).std_error;
  EXPECT_GT(se_small / se_large, 1.5);
  EXPECT_LT(se_small / se_large, 2.7);
}

TEST(UnionBoundTest, SingleCandidateIsZero) {
  SystemConfig cfg = small_cfg(0.1);
  cfg.n_tx = 1;
  cfg.block_len = 1;
  const ConditionalModel m = make_model(EstimatorKind::DD, ModelSide::Full,
                                        kronecker_correlation(CMatrix::Identity(1, 1), exp_matrix(2, 0.5)),
                                        cfg, make_rho({}, cfg), 1);
  RngStream rng(1);
  const UnionBound b = ber_union_bound(m, SignalCodec(cfg, SignalMode::SSK), rng);
  EXPECT_EQ(b.value, 0.0);
  EXPECT_EQ(b.unclipped, 0.0);
}

TEST(UnionBoundTest, TwoCandidatesIsMeanPep) {
  // SSK with two antennas and one slot: one bit, two ordered pairs
  SystemConfig cfg = small_cfg(0.4);
  cfg.block_len = 1;
  const ConditionalModel m = make_model(EstimatorKind::MB, ModelSide::Full, corr(), cfg, make_rho({}, cfg), 3);
  const SignalCodec codec(cfg, SignalMode::SSK);
  const auto all = codec.enumerate();
  ASSERT_EQ(all.size(), 2u);
  RngStream rng(40);
  UnionBoundOptions opts;
  opts.n_mc = 3000;
  const UnionBound b = ber_union_bound(m, codec, rng, opts);
  RngStream r1(41), r2(42);
  const McEstimate p01 = pep_average(codec.matrix(all[0]), codec.matrix(all[1]), m, 3000, r1);
  const McEstimate p10 = pep_average(codec.matrix(all[1]), codec.matrix(all[0]), m, 3000, r2);
  const double want = 0.5 * (p01.mean + p10.mean);
  const double se = std::sqrt(b.std_error * b.std_error + 0.25 * (p01.std_error * p01.std_error +
                                                                  p10.std_error * p10.std_error));
  EXPECT_NEAR(b.unclipped, want, 4.0 * se);
}

TEST(UnionBoundTest, NonincreasingInSnr) {
  double prev = INFINITY;
  for (double noise : {1.0, 0.3, 0.1, 0.03}) {
    const SystemConfig cfg = small_cfg(noise);
    RngStream rng(50);
    UnionBoundOptions opts;
    opts.n_mc = 300;
    const UnionBound b = ber_union_bound(3, cfg, SignalMode::SM, corr().phi, make_rho({}, cfg), rng, opts);
    EXPECT_LE(b.value, prev + 3.0 * b.std_error);
    EXPECT_GE(b.value, 0.0);
    EXPECT_LE(b.value, 1.0);
    prev = b.value;
  }
}

TEST(UnionBoundTest, CandidateGuard) {
  SystemConfig cfg = small_cfg(0.1);
  cfg.n_tx = 4;
  cfg.block_len = 4;
  cfg.mod_order = 4;
  RngStream rng(1);
  EXPECT_EQ(code_of([&] {
              ber_union_bound(1, cfg, SignalMode::SM, CMatrix::Identity(16, 16), make_rho({}, cfg), rng);
            }),
            ErrorCode::SearchSpaceTooLarge);
}

TEST(BerAverage, IndexSets) {
  EXPECT_EQ(averaged_block_indices(EstimatorKind::MB, 3), (std::vector<int>{1, 2, 4, 5}));
  EXPECT_EQ(averaged_block_indices(EstimatorKind::DD, 4), (std::vector<int>{1, 2, 3}));
  EXPECT_EQ(code_of([] { averaged_block_indices(EstimatorKind::MB, 1); }), ErrorCode::InvalidArgument);
  std::map<int, double> v = {{1, 0.1}, {2, 0.2}, {4, 0.3}, {5, 0.4}};
  EXPECT_NEAR(ber_average(v, EstimatorKind::MB, 3), 0.25, 1e-15);
  v.erase(4);
  EXPECT_EQ(code_of([&] { ber_average(v, EstimatorKind::MB, 3); }), ErrorCode::MissingBlockIndex);
}

TEST(BerBoundCurve, MirrorAndConstantStructure) {
  SystemConfig cfg = small_cfg(0.2);
  cfg.frame_len = 3;
  UnionBoundOptions opts;
  opts.n_mc = 50;
  RngStream rng(60);
  const BerBound mb = ber_bound_curve(EstimatorKind::MB, cfg, SignalMode::SM, corr(), make_rho({}, cfg), rng, opts);
  ASSERT_EQ(mb.per_k.size(), 4u);
  EXPECT_EQ(mb.per_k.at(1).value, mb.per_k.at(5).value);
  EXPECT_EQ(mb.per_k.at(2).value, mb.per_k.at(4).value);
  EXPECT_NEAR(mb.average, 0.5 * (mb.per_k.at(1).value + mb.per_k.at(2).value), 1e-15);

  const BerBound dd = ber_bound_curve(EstimatorKind::DD, cfg, SignalMode::SM, corr(), make_rho({}, cfg), rng, opts);
  ASSERT_EQ(dd.per_k.size(), 2u);
  EXPECT_EQ(dd.per_k.at(1).value, dd.per_k.at(2).value);
  EXPECT_EQ(dd.average, dd.per_k.at(1).value);
}

TEST(UnionBoundTest, HighSnrQuadratureConverges) {
  // large thresholds put the CDF integrand near rounding level; this used to throw
  SystemConfig cfg = small_cfg(noise_var_from_ebn0(small_cfg(0.1), 30.0));
  cfg.doppler = 0.01;
  RngStream rng(70);
  UnionBoundOptions opts;
  opts.n_mc = 20;
  const UnionBound b = ber_union_bound(4, cfg, SignalMode::SM, corr().phi, make_rho({}, cfg), rng, opts);
  EXPECT_GE(b.value, 0.0);
  EXPECT_LT(b.value, 1e-2);
}

TEST(UnionBoundTest, FadeSamplerUnbiasedAndTighter) {
  // SSK, two antennas over two slots: 4 candidates, 12 ordered pairs. At
  // 20 dB the sum is dominated by draws with nearly equal columns.
  SystemConfig cfg = small_cfg(0.1);
  cfg.noise_var = noise_var_from_ebn0(cfg, 20.0);
  cfg.doppler = 0.01;
  const ConditionalModel m = make_model(EstimatorKind::MB, ModelSide::Full,
                                        kronecker_correlation(exp_matrix(2, 0.8), exp_matrix(2, 0.8)),
                                        cfg, make_rho({}, cfg), 3);
  const SignalCodec codec(cfg, SignalMode::SSK);
  const auto all = codec.enumerate();
  ASSERT_EQ(all.size(), 4u);

  // plain sampling oracle
  std::mt19937_64 gen(77);
  const CMatrix s = hermitian_sqrt(m.estimate_cov);
  const int n_plain = 6000;
  double sum = 0.0, sum2 = 0.0;
  for (int t = 0; t < n_plain; ++t) {
    const CMatrix hv = s * cn(4, 1, gen);
    CMatrix h(2, 2);
    h << hv(0), hv(2), hv(1), hv(3);
    double v = 0.0;
    for (std::size_t i = 0; i < all.size(); ++i)
      for (std::size_t j = 0; j < all.size(); ++j)
        if (i != j)
          v += codec.hamming(all[i], all[j]) *
               pep_conditional(codec.matrix(all[i]), codec.matrix(all[j]), h, m);
    v /= 4.0 * codec.bits_per_block();
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / n_plain;
  const double sd_plain = std::sqrt((sum2 / n_plain - mean * mean) * n_plain / (n_plain - 1.0));

  RngStream rng(78);
  UnionBoundOptions opts;
  opts.n_mc = 2000;
  const UnionBound b = ber_union_bound(m, codec, rng, opts);
  const double se = std::hypot(b.std_error, sd_plain / std::sqrt(n_plain));
  EXPECT_NEAR(b.unclipped, mean, 4.0 * se);
  // per-draw spread at least halved in variance
  EXPECT_LT(b.std_error * std::sqrt(opts.n_mc), sd_plain / std::sqrt(2.0));
}
