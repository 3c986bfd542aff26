#include "smdet/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "smdet/errors.hpp"
#include "smdet/linalg.hpp"

namespace smdet {

double noise_var_for(const SystemConfig& cfg, SignalMode mode, double ebn0_db) {
  const SignalCodec codec(cfg, mode);
  const double bits_per_slot = static_cast<double>(codec.bits_per_block()) / cfg.block_len;
  const double energy = mode == SignalMode::SMX ? cfg.n_tx * cfg.symbol_power : cfg.symbol_power;
  return energy / (bits_per_slot * std::pow(10.0, ebn0_db / 10.0));
}

CMatrix project_to_correlation(const CMatrix& m, double floor) {
  const CMatrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  const RVector lam = es.eigenvalues().cwiseMax(floor);
  CMatrix out = es.eigenvectors() * lam.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
  const RVector d = out.diagonal().real().cwiseSqrt().cwiseInverse();
  out = d.cast<cplx>().asDiagonal() * out * d.cast<cplx>().asDiagonal();
  out = 0.5 * (out + out.adjoint());
  out.diagonal().setOnes();
  return out;
}

SnrPoint::SnrPoint(const Scenario& scenario, double snr_db)
    : scenario_(scenario), cfg_(scenario.cfg), codec_(scenario.cfg, scenario.mode) {
  scenario_.validate();
  cfg_.noise_var = noise_var_for(cfg_, scenario_.mode, snr_db);
  codec_ = SignalCodec(cfg_, scenario_.mode);
  truth_ = spatial_correlation(scenario_.spatial, cfg_);
  switch (scenario_.stats_mode) {
    case StatsMode::Genie:
    case StatsMode::Estimated: belief_ = truth_; break;
    case StatsMode::PhiTOnly:
      belief_ = kronecker_correlation(truth_.phi_t, CMatrix::Identity(cfg_.n_rx, cfg_.n_rx));
      break;
    case StatsMode::PhiROnly:
      belief_ = kronecker_correlation(CMatrix::Identity(cfg_.n_tx, cfg_.n_tx), truth_.phi_r);
      break;
  }
  rho_ = make_rho(scenario_.temporal, cfg_);
  synth_ = std::make_unique<ChannelSynthesizer>(cfg_, truth_, scenario_.temporal,
                                                scenario_.window_blocks());
  const int n = cfg_.frame_len;
  if (scenario_.estimator == EstimatorKind::MB) {
    pilot_k_ = {0, n, 2 * n};
    for (int k = 1; k < 2 * n; ++k)
      if (k != n) data_k_.push_back(k);
  } else {
    pilot_k_ = {0};
    for (int k = 1; k < n; ++k) data_k_.push_back(k);
  }
  if (scenario_.stats_mode != StatsMode::Estimated) detectors_ = build_detectors(belief_, true);
}

std::vector<std::unique_ptr<Detector>> SnrPoint::build_detectors(const SpatialCorrelation& belief,
                                                                 bool precompute) const {
  DetectorSetup setup;
  setup.cfg = cfg_;
  setup.mode = scenario_.mode;
  setup.spatial = belief;
  setup.rho = rho_;
  setup.blocks = data_k_;
  setup.precompute = precompute;
  return make_detectors(scenario_.detectors, setup);
}

WindowOutcome SnrPoint::run_window(RngStream& rng, WindowTrace* trace) const {
  const int n_blocks = scenario_.window_blocks();
  const ChannelRealization ch = synth_->draw(rng);
  const std::size_t n_det = scenario_.detectors.size();

  std::vector<CMatrix> y(n_blocks);
  std::vector<Bits> bits(n_blocks);
  std::vector<SignalBlock> sent(n_blocks);
  const bool has_pilots = scenario_.estimator != EstimatorKind::Perfect;
  const CMatrix xp = has_pilots ? pilot_block(cfg_) : CMatrix();
  std::vector<bool> is_pilot(n_blocks, false);
  for (int k : pilot_k_) is_pilot[k] = true;
  for (int k = 0; k < n_blocks; ++k) {
    if (is_pilot[k]) {
      if (has_pilots)
        y[k] = ch.blocks[k] * xp + awgn(cfg_.n_rx, cfg_.n_tx, cfg_.noise_var, rng);
      continue;
    }
    bits[k].resize(codec_.bits_per_block());
    for (auto& b : bits[k]) b = static_cast<std::uint8_t>(rng.bit());
    sent[k] = codec_.map(bits[k]);
    y[k] = ch.blocks[k] * codec_.matrix(sent[k]) +
           awgn(cfg_.n_rx, cfg_.block_len, cfg_.noise_var, rng);
  }

  // Receiver side.
  MbWindow mb;
  std::vector<std::unique_ptr<Detector>> local;
  const std::vector<std::unique_ptr<Detector>>* dets = &detectors_;
  if (scenario_.estimator == EstimatorKind::MB) {
    mb.k_p = 0;
    mb.n = cfg_.frame_len;
    mb.pilot_power = cfg_.pilot_power;
    for (int i = 0; i < 3; ++i) mb.pilot_obs[i] = y[pilot_k_[i]];
    if (scenario_.stats_mode == StatsMode::Estimated) {
      const double s = 1.0 / std::sqrt(cfg_.pilot_power);
      const CorrelationEstimate est =
          estimate_spatial_correlation({s * y[pilot_k_[0]], s * y[pilot_k_[1]], s * y[pilot_k_[2]]});
      const SpatialCorrelation fitted = kronecker_correlation(
          project_to_correlation(est.phi_t_hat), project_to_correlation(est.phi_r_hat));
      local = build_detectors(fitted, false);
      dets = &local;
    }
  }

  std::vector<ChannelEstimate> dd_state;
  if (scenario_.estimator == EstimatorKind::DD)
    dd_state.assign(n_det, pilot_estimate(y[0], cfg_, 0));

  WindowOutcome out;
  out.block_k = data_k_;
  out.bits_per_block = codec_.bits_per_block();
  out.errors.assign(n_det, std::vector<int>(data_k_.size(), 0));
  if (trace) {
    trace->channels = ch.blocks;
    trace->observations = y;
    trace->sent.clear();
    trace->h_used.assign(n_det, {});
    trace->decisions.assign(n_det, {});
  }

  for (std::size_t b = 0; b < data_k_.size(); ++b) {
    const int k = data_k_[b];
    if (trace) trace->sent.push_back(sent[k]);
    CMatrix h_mb;
    if (scenario_.estimator == EstimatorKind::MB) h_mb = mb_estimate(mb, k).h_hat;
    for (std::size_t d = 0; d < n_det; ++d) {
      const Detector& det = *(*dets)[d];
      const CMatrix* h = &ch.blocks[k];
      if (det.kind() != DetectorKind::PerfectCSI) {
        if (scenario_.estimator == EstimatorKind::MB) h = &h_mb;
        if (scenario_.estimator == EstimatorKind::DD) h = &dd_state[d].h_hat;
      }
      const Decision dec = det.detect(y[k], *h, k);
      if (trace) {
        trace->h_used[d].push_back(*h);
        trace->decisions[d].push_back(dec);
      }
      const Bits got = codec_.demap(dec.block);
      int e = 0;
      for (std::size_t i = 0; i < got.size(); ++i) e += got[i] != bits[k][i];
      out.errors[d][b] = e;

      if (scenario_.estimator == EstimatorKind::DD && det.kind() != DetectorKind::PerfectCSI) {
        try {
          dd_state[d] = dd_update(dd_state[d], y[k], codec_.matrix(dec.block));
        } catch (const Error& err) {
          if (err.code() != ErrorCode::RankDeficientTruncation) throw;
          dd_state[d].block_idx += 1;  // keep the previous estimate
        }
      }
    }
  }
  return out;
}

WindowOutcome run_frame_window(const Scenario& scenario, double snr_db, RngStream& rng,
                               WindowTrace* trace) {
  return SnrPoint(scenario, snr_db).run_window(rng, trace);
}

const CurvePoint& BerCurve::at(DetectorKind detector, double snr_db) const {
  for (const CurvePoint& p : points)
    if (p.detector == detector && p.snr_db == snr_db) return p;
  raise(ErrorCode::InvalidArgument, "no curve point for " + std::string(to_string(detector)));
}

namespace {

// Runs trials [first, first + count) on up to `workers` threads.
std::vector<WindowOutcome> run_batch(const SnrPoint& pt, std::uint64_t seed, std::uint64_t snr_idx,
                                     std::int64_t first, int count, int workers) {
  std::vector<WindowOutcome> out(count);
  auto one = [&](int i) {
    RngStream rng(derive_seed(seed, snr_idx, static_cast<std::uint64_t>(first + i)));
    out[i] = pt.run_window(rng);
  };
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) one(i);
    return out;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < std::min(workers, count); ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          one(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          return;
        }
      }
    });
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace

BerCurve run_sweep(const Scenario& scenario, const SweepOptions& opts) {
  scenario.validate();
  const int workers = std::max(1, opts.workers);
  const int batch = workers == 1 ? 1 : 4 * workers;
  const std::size_t n_det = scenario.detectors.size();

  BerCurve curve;
  curve.scenario = scenario;
  std::vector<std::vector<CurvePoint>> by_det(n_det);

  for (std::size_t si = 0; si < scenario.snr_db.size(); ++si) {
    const double snr = scenario.snr_db[si];
    const SnrPoint pt(scenario, snr);
    std::vector<CurvePoint> acc(n_det);
    for (std::size_t d = 0; d < n_det; ++d) {
      acc[d].detector = scenario.detectors[d];
      acc[d].snr_db = snr;
      for (int k : pt.data_blocks()) acc[d].per_k[k] = {};
    }
    std::int64_t trial = 0;
    bool done = false;
    while (!done) {
      const std::vector<WindowOutcome> outs = run_batch(pt, scenario.seed, si, trial, batch, workers);
      trial += batch;
      for (const WindowOutcome& w : outs) {
        for (std::size_t d = 0; d < n_det; ++d) {
          CurvePoint& p = acc[d];
          ++p.windows;
          for (std::size_t b = 0; b < w.block_k.size(); ++b) {
            ErrorCount& c = p.per_k[w.block_k[b]];
            c.bits += w.bits_per_block;
            c.errors += w.errors[d][b];
            p.total.bits += w.bits_per_block;
            p.total.errors += w.errors[d][b];
          }
        }
        bool all_errors = true;
        for (const CurvePoint& p : acc) all_errors = all_errors && p.total.errors >= scenario.stop.min_errors;
        if (all_errors) {
          done = true;
        } else if (acc.front().total.bits >= scenario.stop.max_bits) {
          for (CurvePoint& p : acc) p.budget_exceeded = p.total.errors < scenario.stop.min_errors;
          done = true;
        }
        if (done) break;
      }
    }
    if (opts.progress) {
      std::ostringstream msg;
      msg << "snr " << snr << " dB: " << acc.front().windows << " windows, "
          << acc.front().total.bits << " bits";
      for (const CurvePoint& p : acc) msg << ", " << to_string(p.detector) << " " << p.total.errors;
      opts.progress(msg.str());
    }
    for (std::size_t d = 0; d < n_det; ++d) by_det[d].push_back(std::move(acc[d]));
  }
  for (auto& v : by_det)
    for (auto& p : v) curve.points.push_back(std::move(p));
  return curve;
}

}  // namespace smdet
