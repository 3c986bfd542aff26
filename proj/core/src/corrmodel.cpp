#include "smdet/corrmodel.hpp"

#include <cmath>
#include <string>

#include "smdet/errors.hpp"
#include "smdet/linalg.hpp"

namespace smdet {

double bessel_j0(double x) { return std::cyl_bessel_j(0.0, std::abs(x)); }

SpatialModel SpatialModel::bessel(double spacing) {
  SpatialModel m;
  m.kind = SpatialKind::Bessel;
  m.spacing = spacing;
  return m;
}

SpatialModel SpatialModel::exponential(double r, double t) {
  SpatialModel m;
  m.kind = SpatialKind::Exponential;
  m.r = r;
  m.t = t;
  return m;
}

SpatialModel SpatialModel::explicit_kronecker(CMatrix phi_t, CMatrix phi_r) {
  SpatialModel m;
  m.kind = SpatialKind::Explicit;
  m.kronecker = true;
  m.phi_t = std::move(phi_t);
  m.phi_r = std::move(phi_r);
  return m;
}

SpatialModel SpatialModel::explicit_full(CMatrix phi) {
  SpatialModel m;
  m.kind = SpatialKind::Explicit;
  m.kronecker = false;
  m.phi = std::move(phi);
  return m;
}

namespace {

CMatrix exponential_matrix(int n, double c) {
  CMatrix out(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out(i, j) = std::pow(c, std::abs(i - j));
  return out;
}

CMatrix bessel_matrix(int n, double spacing) {
  CMatrix out(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out(i, j) = bessel_j0(2.0 * kPi * std::abs(i - j) * spacing);
  return out;
}

void check_explicit(const CMatrix& m, Eigen::Index n, const char* what) {
  if (m.rows() != n || m.cols() != n)
    raise(ErrorCode::ShapeMismatch, std::string(what) + " has the wrong dimension");
  if (!is_hermitian(m)) raise(ErrorCode::NotHermitian, std::string(what) + " is not Hermitian");
  if (min_eigenvalue(m) < -1e-10)
    raise(ErrorCode::ExplicitNotPSD, std::string(what) + " is not positive semidefinite");
  for (Eigen::Index i = 0; i < n; ++i)
    if (std::abs(m(i, i) - 1.0) > 1e-10)
      raise(ErrorCode::InvalidArgument, std::string(what) + " must have unit diagonal");
}

}  // namespace

SpatialCorrelation kronecker_correlation(const CMatrix& phi_t, const CMatrix& phi_r) {
  SpatialCorrelation out;
  out.phi_t = phi_t;
  out.phi_r = phi_r;
  out.phi = kron(phi_t, phi_r);
  out.kronecker = true;
  return out;
}

SpatialCorrelation spatial_correlation(const SpatialModel& model, const SystemConfig& cfg) {
  const int nt = cfg.n_tx;
  const int nr = cfg.n_rx;
  switch (model.kind) {
    case SpatialKind::Exponential:
      if (!(model.r >= 0.0 && model.r < 1.0 && model.t >= 0.0 && model.t < 1.0))
        raise(ErrorCode::InvalidArgument, "exponential coefficients must lie in [0, 1)");
      return kronecker_correlation(exponential_matrix(nt, model.t),
                                   exponential_matrix(nr, model.r));
    case SpatialKind::Bessel:
      if (!(model.spacing >= 0.0))
        raise(ErrorCode::InvalidArgument, "antenna spacing must be non-negative");
      return kronecker_correlation(bessel_matrix(nt, model.spacing),
                                   bessel_matrix(nr, model.spacing));
    case SpatialKind::Explicit:
      break;
  }
  if (model.kronecker) {
    check_explicit(model.phi_t, nt, "Phi_T");
    check_explicit(model.phi_r, nr, "Phi_R");
    return kronecker_correlation(model.phi_t, model.phi_r);
  }
  check_explicit(model.phi, static_cast<Eigen::Index>(nt) * nr, "Phi");
  SpatialCorrelation out;
  out.kronecker = false;
  out.phi = model.phi;
  out.phi_r = CMatrix::Zero(nr, nr);
  out.phi_t = CMatrix::Zero(nt, nt);
  for (int j = 0; j < nt; ++j) {
    out.phi_r += model.phi.block(j * nr, j * nr, nr, nr);
    for (int n = 0; n < nt; ++n)
      out.phi_t(j, n) = model.phi.block(j * nr, n * nr, nr, nr).trace() / static_cast<double>(nr);
  }
  out.phi_r /= static_cast<double>(nt);
  return out;
}

double temporal_correlation(int lag, const TemporalModel& model, const SystemConfig& cfg) {
  if (model.kind == TemporalKind::Static) return 1.0;
  return bessel_j0(2.0 * kPi * cfg.doppler * static_cast<double>(lag) * cfg.block_len);
}

RhoFn make_rho(const TemporalModel& model, const SystemConfig& cfg) {
  return [model, cfg](int lag) { return temporal_correlation(lag, model, cfg); };
}

ChannelSynthesizer::ChannelSynthesizer(const SystemConfig& cfg, const SpatialCorrelation& spatial,
                                       const TemporalModel& temporal, int n_blocks)
    : n_rx_(cfg.n_rx), n_tx_(cfg.n_tx), n_blocks_(n_blocks) {
  if (n_blocks < 1) raise(ErrorCode::InvalidArgument, "n_blocks must be >= 1");
  phi_sqrt_ = psd_sqrt(spatial.phi);

  RVector col(n_blocks);
  for (int k = 0; k < n_blocks; ++k) col(k) = temporal_correlation(k, temporal, cfg);
  // rho == 1 at every lag means a single draw repeated; the Cholesky route
  // would only reach that up to the jitter.
  static_time_ = (col.array() == 1.0).all();
  if (static_time_) return;

  const RMatrix rt = toeplitz(col);
  Eigen::LLT<RMatrix> llt(rt);
  if (llt.info() != Eigen::Success) {
    llt.compute(rt + 1e-10 * RMatrix::Identity(n_blocks, n_blocks));
    if (llt.info() != Eigen::Success)
      raise(ErrorCode::TemporalGramNotPSD, "temporal Toeplitz matrix is not positive definite");
  }
  temporal_chol_ = llt.matrixL();
}

ChannelRealization ChannelSynthesizer::draw(RngStream& rng) const {
  const Eigen::Index dim = static_cast<Eigen::Index>(n_rx_) * n_tx_;
  ChannelRealization out;
  out.blocks.reserve(n_blocks_);
  if (static_time_) {
    const CVector h = phi_sqrt_ * rng.complex_normal(dim, 1).col(0);
    for (int k = 0; k < n_blocks_; ++k) out.blocks.push_back(unvec(h, n_rx_, n_tx_));
    return out;
  }
  const CMatrix w = rng.complex_normal(dim, n_blocks_);
  const CMatrix v = phi_sqrt_ * (w * temporal_chol_.transpose().cast<cplx>());
  for (int k = 0; k < n_blocks_; ++k) out.blocks.push_back(unvec(v.col(k), n_rx_, n_tx_));
  return out;
}

ChannelRealization generate_channels(const SystemConfig& cfg, const SpatialModel& spatial,
                                     const TemporalModel& temporal, int n_blocks,
                                     RngStream& rng) {
  return ChannelSynthesizer(cfg, spatial_correlation(spatial, cfg), temporal, n_blocks).draw(rng);
}

CMatrix awgn(Eigen::Index rows, Eigen::Index cols, double noise_var, RngStream& rng) {
  if (noise_var <= 0.0) return CMatrix::Zero(rows, cols);
  return rng.complex_normal(rows, cols, noise_var);
}

}  // namespace smdet
