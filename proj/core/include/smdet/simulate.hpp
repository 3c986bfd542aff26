#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "smdet/chest.hpp"
#include "smdet/corrmodel.hpp"
#include "smdet/detectors.hpp"
#include "smdet/rng.hpp"
#include "smdet/scenario.hpp"
#include "smdet/smcodec.hpp"

namespace smdet {

/// sigma_z^2 = E_slot / (bits_per_slot * 10^(dB/10)), E_slot = eps_s for SM and
/// SSK, N_T eps_s for SMX.
double noise_var_for(const SystemConfig& cfg, SignalMode mode, double ebn0_db);

/// Nearest unit-diagonal PSD matrix: eigenvalues clipped at floor, then the
/// diagonal rescaled to one.
CMatrix project_to_correlation(const CMatrix& m, double floor = 1e-6);

/// Optional record of one window, for inspection and tests.
struct WindowTrace {
  std::vector<CMatrix> channels;      // H(0) .. H(K)
  std::vector<CMatrix> observations;  // Y(0) .. Y(K)
  std::vector<SignalBlock> sent;      // per data block
  // [detector][data block]
  std::vector<std::vector<CMatrix>> h_used;
  std::vector<std::vector<Decision>> decisions;
};

struct WindowOutcome {
  std::vector<int> block_k;              // data-block indices, in order
  int bits_per_block = 0;
  std::vector<std::vector<int>> errors;  // [detector][data block]
};

/// One SNR point of a scenario: everything that can be prepared once and then
/// shared read-only by concurrent windows.
class SnrPoint {
 public:
  SnrPoint(const Scenario& scenario, double snr_db);

  const SystemConfig& config() const { return cfg_; }
  const std::vector<int>& data_blocks() const { return data_k_; }

  /// Runs one trial window: channel draw, pilots, estimation and every
  /// configured detector on every data block. DD detectors feed their own
  /// decisions forward.
  WindowOutcome run_window(RngStream& rng, WindowTrace* trace = nullptr) const;

 private:
  std::vector<std::unique_ptr<Detector>> build_detectors(const SpatialCorrelation& belief,
                                                         bool precompute) const;

  Scenario scenario_;
  SystemConfig cfg_;
  SignalCodec codec_;
  SpatialCorrelation truth_;
  SpatialCorrelation belief_;
  RhoFn rho_;
  std::unique_ptr<ChannelSynthesizer> synth_;
  std::vector<int> data_k_;
  std::vector<int> pilot_k_;
  std::vector<std::unique_ptr<Detector>> detectors_;  // empty in Estimated mode
};

WindowOutcome run_frame_window(const Scenario& scenario, double snr_db, RngStream& rng,
                               WindowTrace* trace = nullptr);

struct ErrorCount {
  std::int64_t bits = 0;
  std::int64_t errors = 0;
};

struct CurvePoint {
  DetectorKind detector = DetectorKind::PerfectCSI;
  double snr_db = 0.0;
  ErrorCount total;
  std::map<int, ErrorCount> per_k;
  std::int64_t windows = 0;
  bool budget_exceeded = false;  // max_bits hit before min_errors
};

struct BerCurve {
  Scenario scenario;
  std::vector<CurvePoint> points;  // detector-major, SNR-minor

  const CurvePoint& at(DetectorKind detector, double snr_db) const;
};

struct SweepOptions {
  int workers = 1;
  std::function<void(const std::string&)> progress;
};

/// Seeds trial t of SNR index i with derive_seed(seed, i, t); results are
/// reduced in trial order, so they do not depend on the worker count.
BerCurve run_sweep(const Scenario& scenario, const SweepOptions& opts = {});

}  // namespace smdet
