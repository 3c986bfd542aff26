#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "smdet/config.hpp"
#include "smdet/rng.hpp"
#include "smdet/types.hpp"

namespace smdet {

double bessel_j0(double x);

enum class SpatialKind { Bessel, Exponential, Explicit };

struct SpatialModel {
  SpatialKind kind = SpatialKind::Exponential;
  double spacing = 0.5;  // delta / lambda, same at both ends
  double r = 0.0;        // receive-side exponential coefficient
  double t = 0.0;        // transmit-side exponential coefficient
  bool kronecker = true;
  // Explicit: either (phi_t, phi_r) with kronecker=true or full phi otherwise.
  CMatrix phi_t;
  CMatrix phi_r;
  CMatrix phi;

  static SpatialModel bessel(double spacing);
  static SpatialModel exponential(double r, double t);
  static SpatialModel explicit_kronecker(CMatrix phi_t, CMatrix phi_r);
  static SpatialModel explicit_full(CMatrix phi);
};

/// Phi indexes vec(H) column-stacked, so Phi = Phi_T (x) Phi_R for Kronecker
/// models. For a non-Kronecker Phi the one-sided factors are the partial
/// traces, normalized to unit diagonal.
struct SpatialCorrelation {
  CMatrix phi_t;
  CMatrix phi_r;
  CMatrix phi;
  bool kronecker = true;
};

SpatialCorrelation spatial_correlation(const SpatialModel& model, const SystemConfig& cfg);

/// Builds a Kronecker SpatialCorrelation from its factors.
SpatialCorrelation kronecker_correlation(const CMatrix& phi_t, const CMatrix& phi_r);

enum class TemporalKind { Jakes, Static };

struct TemporalModel {
  TemporalKind kind = TemporalKind::Jakes;
};

/// rho_T(lag) in blocks: J0(2 pi f_D T_s lag B) for Jakes, 1 for Static.
double temporal_correlation(int lag, const TemporalModel& model, const SystemConfig& cfg);

using RhoFn = std::function<double(int)>;
RhoFn make_rho(const TemporalModel& model, const SystemConfig& cfg);

struct ChannelRealization {
  std::vector<CMatrix> blocks;  // H(0) .. H(K), each N_R x N_T
};

/// Precomputes Phi^{1/2} and chol(R_T) for a fixed window length so repeated
/// trials only pay for the Gaussian draws and two matrix products.
class ChannelSynthesizer {
 public:
  ChannelSynthesizer(const SystemConfig& cfg, const SpatialCorrelation& spatial,
                     const TemporalModel& temporal, int n_blocks);

  ChannelRealization draw(RngStream& rng) const;
  int n_blocks() const { return n_blocks_; }

 private:
  int n_rx_;
  int n_tx_;
  int n_blocks_;
  bool static_time_ = false;
  CMatrix phi_sqrt_;
  RMatrix temporal_chol_;
};

ChannelRealization generate_channels(const SystemConfig& cfg, const SpatialModel& spatial,
                                     const TemporalModel& temporal, int n_blocks,
                                     RngStream& rng);

CMatrix awgn(Eigen::Index rows, Eigen::Index cols, double noise_var, RngStream& rng);

}  // namespace smdet
