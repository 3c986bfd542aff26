#include <benchmark/benchmark.h>

#include "smdet/analysis.hpp"
#include "smdet/quadform.hpp"

namespace {

using namespace smdet;

void BM_QuadFormCdf_6Terms(benchmark::State& state) {
  QuadFormSpec s{{2.0, -1.0, 0.5, -0.3, 1.5, -2.0},
                 {cplx(0.3, 0.1), cplx(-1, 0.5), 0.0, cplx(0.2, 0.2), cplx(1, -1), 0.5},
                 0.0,
                 0.7};
  for (auto _ : state) benchmark::DoNotOptimize(quadratic_form_cdf(s));
}

void BM_PepConditional_2x2(benchmark::State& state) {
  SystemConfig cfg;
  cfg.n_tx = cfg.n_rx = cfg.block_len = 2;
  cfg.mod_order = 2;
  cfg.frame_len = 5;
  cfg.noise_var = 0.05;
  const SpatialCorrelation sc = spatial_correlation(SpatialModel::exponential(0.8, 0.8), cfg);
  const RhoFn rho = make_rho(TemporalModel{}, cfg);
  const ConditionalModel m = make_model(EstimatorKind::MB, ModelSide::Full, sc, cfg, rho, 2);
  const SignalCodec codec(cfg);
  const CMatrix x = codec.matrix(codec.block_at(3));
  const CMatrix xa = codec.matrix(codec.block_at(9));
  RngStream rng(3);
  const PairwiseCase pc(x, xa, m);
  const CMatrix h = rng.complex_normal(2, 2);
  for (auto _ : state) benchmark::DoNotOptimize(quadratic_form_cdf(pc.spec(h)));
}

}  // namespace

BENCHMARK(BM_QuadFormCdf_6Terms)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_PepConditional_2x2)->Unit(benchmark::kMicrosecond);
