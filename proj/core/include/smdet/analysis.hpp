#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "smdet/config.hpp"
#include "smdet/corrmodel.hpp"
#include "smdet/linalg.hpp"
#include "smdet/quadform.hpp"
#include "smdet/rng.hpp"
#include "smdet/smcodec.hpp"
#include "smdet/statistics.hpp"
#include "smdet/types.hpp"

namespace smdet {

/// Distribution assumed for vec(Y) given H_hat when evaluating a PEP.
///   ExactConditional: CN(m(X), C(X)), the law the detector metric is built on.
///   EstimationError:  CN(vec(H_hat X), sigma^2 I + (X^T (x) I) Psi_E (X^* (x) I)),
///                     which treats the estimation error as independent of H_hat.
enum class PepNoiseModel { ExactConditional, EstimationError };

/// Everything about an ordered pair (X, X') that does not depend on H_hat.
/// The metric difference  Delta = metric(X') - metric(X)  with
/// vec(Y) = mu + L z, z ~ CN(0, I), is written as
///   Delta = z^H M z + 2 Re(z^H beta) + c0,  M = L^H (C'^{-1} - C^{-1}) L = U Lambda U^H.
class PairwiseCase {
 public:
  PairwiseCase(const CMatrix& x, const CMatrix& x_alt, const ConditionalModel& model,
               PepNoiseModel noise = PepNoiseModel::ExactConditional);

  /// Quadratic form Q with P{Delta < 0 | H_hat} = P{Q < threshold}.
  QuadFormSpec spec(const CMatrix& h_hat) const;
  /// Same from the precomputed gain A vec(H_hat).
  QuadFormSpec spec_from_gain(const CMatrix& h_hat, const CVector& gain) const;

  const RVector& eigenvalues() const { return lambda_; }

 private:
  ConditionalModel model_;
  CMatrix x_;
  CMatrix x_alt_;
  PepNoiseModel noise_;
  HpdFactor c_;      // C(X)
  HpdFactor c_alt_;  // C(X')
  CMatrix sqrt_cov_;  // L with L L^H = covariance of vec(Y) given H_hat
  CMatrix u_;
  RVector lambda_;
  std::vector<bool> quadratic_;  // eigen-direction keeps its quadratic term
};

/// P{X -> X' | H_hat} for the CEEA-ML metric built on model (side Full).
double pep_conditional(const CMatrix& x, const CMatrix& x_alt, const CMatrix& h_hat,
                       const ConditionalModel& model,
                       PepNoiseModel noise = PepNoiseModel::ExactConditional, double tol = 1e-8);
/// MB convenience form: data block k of the window, correlation phi, temporal rho.
double pep_conditional(const CMatrix& x, const CMatrix& x_alt, int k, const CMatrix& h_hat,
                       const SystemConfig& cfg, const CMatrix& phi, const RhoFn& rho,
                       PepNoiseModel noise = PepNoiseModel::ExactConditional);

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  int samples = 0;
};

/// Monte Carlo average of the conditional PEP over H_hat ~ CN(0, Sigma_22).
McEstimate pep_average(const CMatrix& x, const CMatrix& x_alt, const ConditionalModel& model,
                       int n_mc, RngStream& rng,
                       PepNoiseModel noise = PepNoiseModel::ExactConditional);
McEstimate pep_average(const CMatrix& x, const CMatrix& x_alt, int k, const SystemConfig& cfg,
                       const CMatrix& phi, const RhoFn& rho, int n_mc, RngStream& rng,
                       PepNoiseModel noise = PepNoiseModel::ExactConditional);

struct UnionBoundOptions {
  int n_mc = 2000;
  PepNoiseModel noise = PepNoiseModel::ExactConditional;
  double cdf_tol = 1e-8;
  std::int64_t max_candidates = std::int64_t{1} << 12;
};

struct UnionBound {
  double value = 0.0;      // clipped to [0, 1]
  double unclipped = 0.0;
  double std_error = 0.0;  // Monte Carlo error of the unclipped sum
};

/// Union bound on BER(k) summed over ordered candidate pairs in index order.
UnionBound ber_union_bound(const ConditionalModel& model, const SignalCodec& codec,
                           RngStream& rng, const UnionBoundOptions& opts = {});
/// MB CEEA-ML bound for window-relative data block k.
UnionBound ber_union_bound(int k, const SystemConfig& cfg, SignalMode mode, const CMatrix& phi,
                           const RhoFn& rho, RngStream& rng, const UnionBoundOptions& opts = {});

/// Data-block indices averaged for an estimator: MB 1..2N-1 without N, DD 1..N-1.
std::vector<int> averaged_block_indices(EstimatorKind estimator, int frame_len);

/// Arithmetic mean of per-k values over the estimator's index set.
double ber_average(const std::map<int, double>& per_k, EstimatorKind estimator, int frame_len);

struct BerBound {
  SystemConfig cfg;
  EstimatorKind estimator = EstimatorKind::MB;
  std::map<int, UnionBound> per_k;
  double average = 0.0;
};

/// Per-k union bounds over the estimator's index set plus the frame average.
/// Blocks k and 2N - k share statistics under MB, so each pair is computed once.
BerBound ber_bound_curve(EstimatorKind estimator, const SystemConfig& cfg, SignalMode mode,
                         const SpatialCorrelation& spatial, const RhoFn& rho, RngStream& rng,
                         const UnionBoundOptions& opts = {});

}  // namespace smdet
