#include <benchmark/benchmark.h>

#include "smdet/corrmodel.hpp"
#include "smdet/detectors.hpp"
#include "smdet/rng.hpp"
#include "smdet/smcodec.hpp"

namespace {

using namespace smdet;

struct Fixture {
  SystemConfig cfg;
  DetectorSetup setup;
  SignalCodec codec;
  CMatrix h;
  CMatrix y;

  Fixture(int nt, int nr, int b, int m, ModKind kind, SignalMode mode)
      : cfg(make_cfg(nt, nr, b, m, kind)), codec(cfg, mode) {
    setup.cfg = cfg;
    setup.mode = mode;
    setup.spatial = spatial_correlation(SpatialModel::exponential(0.8, 0.8), cfg);
    setup.rho = make_rho(TemporalModel{}, cfg);
    setup.blocks = {1};
    RngStream rng(7);
    h = rng.complex_normal(nr, nt);
    Bits bits(codec.bits_per_block());
    for (auto& x : bits) x = static_cast<std::uint8_t>(rng.bit());
    y = h * codec.matrix(codec.map(bits)) + rng.complex_normal(nr, b, cfg.noise_var);
  }

  static SystemConfig make_cfg(int nt, int nr, int b, int m, ModKind kind) {
    SystemConfig c;
    c.n_tx = nt;
    c.n_rx = nr;
    c.block_len = b;
    c.mod_order = m;
    c.mod_kind = kind;
    c.frame_len = 10;
    c.noise_var = 0.05;
    return c;
  }
};

void run(benchmark::State& state, DetectorKind kind, Fixture& f) {
  const auto det = make_detector(kind, f.setup);
  for (auto _ : state) benchmark::DoNotOptimize(det->detect(f.y, f.h, 1));
}

void BM_CeeaMl_4x4_QPSK(benchmark::State& state) {
  Fixture f(4, 4, 4, 4, ModKind::PSK, SignalMode::SM);
  run(state, DetectorKind::CeeaMlMb, f);
}
void BM_TwoStage_4x4_QPSK(benchmark::State& state) {
  Fixture f(4, 4, 4, 4, ModKind::PSK, SignalMode::SM);
  run(state, DetectorKind::TwoStageMb, f);
}
void BM_Zrc_4x4_QPSK(benchmark::State& state) {
  Fixture f(4, 4, 4, 4, ModKind::PSK, SignalMode::SM);
  run(state, DetectorKind::ZrcMb, f);
}
void BM_Ztc_4x4_QPSK(benchmark::State& state) {
  Fixture f(4, 4, 4, 4, ModKind::PSK, SignalMode::SM);
  run(state, DetectorKind::ZtcMb, f);
}
void BM_Mismatched_4x4_QPSK(benchmark::State& state) {
  Fixture f(4, 4, 4, 4, ModKind::PSK, SignalMode::SM);
  run(state, DetectorKind::Mismatched, f);
}
void BM_CeeaMl_2x4_16QAM(benchmark::State& state) {
  Fixture f(2, 4, 2, 16, ModKind::QAM, SignalMode::SM);
  run(state, DetectorKind::CeeaMlMb, f);
}
void BM_CeeaMl_SMX_2x2_QPSK(benchmark::State& state) {
  Fixture f(2, 2, 2, 4, ModKind::PSK, SignalMode::SMX);
  run(state, DetectorKind::CeeaMlMb, f);
}

}  // namespace

BENCHMARK(BM_CeeaMl_4x4_QPSK)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_TwoStage_4x4_QPSK)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Zrc_4x4_QPSK)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Ztc_4x4_QPSK)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Mismatched_4x4_QPSK)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_CeeaMl_2x4_16QAM)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_CeeaMl_SMX_2x2_QPSK)->Unit(benchmark::kMicrosecond);
BENCHMARK_MAIN();
