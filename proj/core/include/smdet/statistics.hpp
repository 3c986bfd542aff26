#pragma once

#include <string_view>

#include "smdet/chest.hpp"
#include "smdet/config.hpp"
#include "smdet/corrmodel.hpp"
#include "smdet/types.hpp"

namespace smdet {

enum class EstimatorKind { MB, DD, Perfect };

std::string_view to_string(EstimatorKind kind);
EstimatorKind parse_estimator(std::string_view text);

/// Which spatial structure the receiver models: the full Phi, the transmit
/// side only (ZRC, Phi_R = I) or the receive side only (ZTC, Phi_T = I).
enum class ModelSide { Full, Zrc, Ztc };

/// Gaussian model of the received block given the candidate and the channel
/// estimate. For side Full every matrix is N_R N_T square and
///   m(X) = (X^T (x) I) A vec(H_hat),  C(X) = sigma^2 I + (X^T (x) I) K (X^* (x) I).
/// Zrc keeps the N_T x N_T transmit factors and Ztc the N_R x N_R receive ones.
struct ConditionalModel {
  ModelSide side = ModelSide::Full;
  CMatrix A;
  CMatrix K;
  CMatrix estimate_cov;  // Sigma_22 = E{vec(H_hat) vec(H_hat)^H}
  CMatrix error_cov;     // Psi_E = E{vec(E) vec(E)^H}, E = H_hat - H
  double noise_var = 0.0;
  double cross_gain = 0.0;
};

ConditionalModel mb_model(const MbTerms& terms, const CMatrix& phi, double noise_var,
                          double est_noise_var, ModelSide side = ModelSide::Full);
ConditionalModel dd_model(const CMatrix& phi, double rho1, double noise_var, double est_noise_var,
                          ModelSide side = ModelSide::Full);

/// Builds the model for data block k of the given estimator. k is
/// window-relative (pilots at 0, N, 2N); ignored for DD.
ConditionalModel make_model(EstimatorKind estimator, ModelSide side,
                            const SpatialCorrelation& spatial, const SystemConfig& cfg,
                            const RhoFn& rho, int k);

/// Full-side mean and covariance for an arbitrary N_T x B block.
CVector conditional_mean(const ConditionalModel& model, const CMatrix& x, const CMatrix& h_hat);
CMatrix conditional_covariance(const ConditionalModel& model, const CMatrix& x);

struct CandidateStatistics {
  CVector mean;        // Full: vec of the N_R x B mean; Zrc/Ztc: vec of the N_R x B mean as well
  CMatrix covariance;  // Full: B N_R; Zrc: B x B (per receive row); Ztc: N_R x N_R (per column)
  double log_det = 0.0;
};

CandidateStatistics mb_statistics(const CMatrix& x, int k, const CMatrix& h_hat,
                                  const SystemConfig& cfg, const CMatrix& phi, const RhoFn& rho);
CandidateStatistics dd_statistics(const CMatrix& x, const CMatrix& h_hat, const SystemConfig& cfg,
                                  const CMatrix& phi, double rho1);
/// Zrc takes Phi_T, Ztc takes Phi_R. Ztc uses X X^H ~ eps_s I.
CandidateStatistics reduced_statistics(ModelSide side, EstimatorKind estimator, const CMatrix& x,
                                       int k, const CMatrix& h_hat, const SystemConfig& cfg,
                                       const CMatrix& one_sided_phi, const RhoFn& rho);

/// Gain applied to H_hat before the candidate: Full returns A vec(H_hat);
/// Zrc returns H_hat A^T; Ztc returns A H_hat. The last two are N_R x N_T.
CMatrix model_gain(const ConditionalModel& model, const CMatrix& h_hat);

/// Per-column covariance used by Ztc: sigma^2 I + eps K.
CMatrix ztc_covariance(const ConditionalModel& model, double column_energy);

}  // namespace smdet
