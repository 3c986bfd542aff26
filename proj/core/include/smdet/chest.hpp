#pragma once

#include <array>

#include "smdet/config.hpp"
#include "smdet/corrmodel.hpp"
#include "smdet/smcodec.hpp"
#include "smdet/types.hpp"

namespace smdet {

/// T(k_p) for pilots at k_p, k_p+N, k_p+2N (rows [k^2, k, 1]).
Eigen::Matrix3d mb_pilot_matrix(int k_p, int n);

/// w(k) = t(k)^T T^{-1}(k_p). Evaluated on window-relative epochs, which gives
/// the same interpolating weights with a much better conditioned T.
Eigen::RowVector3d mb_weights(int k, int k_p, int n);

enum class EstimateSource { MB, DD, Perfect };

struct ChannelEstimate {
  CMatrix h_hat;
  EstimateSource source = EstimateSource::MB;
  int block_idx = 0;
};

struct MbWindow {
  int k_p = 0;
  int n = 0;
  std::array<CMatrix, 3> pilot_obs;  // Y(k_p), Y(k_p+N), Y(k_p+2N)
  double pilot_power = 1.0;
};

ChannelEstimate mb_estimate(const MbWindow& window, int k);

struct MbTerms {
  Eigen::RowVector3d w;
  double cross_gain = 0.0;  // w . q(k)
  double nu = 0.0;          // w R3 w^T
  double w_norm2 = 0.0;
};

MbTerms mb_temporal_terms(int k, int k_p, int n, const RhoFn& rho);

/// Psi_E = (nu - 2 w.q + 1) Phi + (sigma^2/eps_p) ||w||^2 I.
CMatrix mb_error_covariance(int k, const SystemConfig& cfg, const CMatrix& phi, const RhoFn& rho);

/// LS refresh of the detected-active columns; the rest carry over from prev.
ChannelEstimate dd_update(const ChannelEstimate& prev, const CMatrix& y, const CMatrix& x_hat);

/// Pilot-block LS estimate Y / sqrt(eps_p).
ChannelEstimate pilot_estimate(const CMatrix& y, const SystemConfig& cfg, int block_idx);

struct CorrelationEstimate {
  double r_hat = 0.0;
  double t_hat = 0.0;
  CMatrix phi_r_bar;
  CMatrix phi_t_bar;
  CMatrix phi_r_hat;
  CMatrix phi_t_hat;
};

/// Least-squares fit of c^{|i-j|} to |bar|: 64-point grid then golden section.
double fit_exponential_coefficient(const CMatrix& bar);

/// bar = time average of H H^H / N_T (and H^T H^* / N_R) over the three pilot
/// estimates. The exponential coefficient is fitted to bar rescaled to unit
/// diagonal; the sign pattern comes from Re(bar).
CorrelationEstimate estimate_spatial_correlation(const std::array<CMatrix, 3>& pilot_estimates);

/// Inverts rho_T(N) = J0(2 pi f N B) on the main lobe from the sample
/// correlation between consecutive pilot estimates. Returns f_D T_s.
double estimate_doppler(const std::array<CMatrix, 3>& pilot_estimates, int n, int block_len);

}  // namespace smdet
