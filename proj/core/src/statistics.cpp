#include "smdet/statistics.hpp"

#include <string>

#include "smdet/errors.hpp"
#include "smdet/linalg.hpp"

namespace smdet {

std::string_view to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::MB: return "MB";
    case EstimatorKind::DD: return "DD";
    case EstimatorKind::Perfect: return "Perfect";
  }
  return "MB";
}

EstimatorKind parse_estimator(std::string_view text) {
  if (text == "MB" || text == "mb") return EstimatorKind::MB;
  if (text == "DD" || text == "dd") return EstimatorKind::DD;
  if (text == "Perfect" || text == "perfect") return EstimatorKind::Perfect;
  raise(ErrorCode::InvalidArgument, "unknown estimator '" + std::string(text) + "'");
}

namespace {

CMatrix identity_like(const CMatrix& m) { return CMatrix::Identity(m.rows(), m.cols()); }

// A = c Phi Sigma22^{-1}; Sigma22 and Phi commute, so A is Phi-Hermitian.
CMatrix gain_matrix(double c, const CMatrix& phi, const CMatrix& sigma22) {
  const HpdFactor f(sigma22);
  // Phi Sigma22^{-1} = (Sigma22^{-1} Phi)^H for Hermitian inputs.
  return c * f.solve(phi).adjoint();
}

}  // namespace

ConditionalModel mb_model(const MbTerms& terms, const CMatrix& phi, double noise_var,
                          double est_noise_var, ModelSide side) {
  ConditionalModel m;
  m.side = side;
  m.noise_var = noise_var;
  m.cross_gain = terms.cross_gain;
  m.estimate_cov = terms.nu * phi;
  m.estimate_cov.diagonal().array() += est_noise_var * terms.w_norm2;
  m.A = gain_matrix(terms.cross_gain, phi, m.estimate_cov);
  m.K = (identity_like(phi) - terms.cross_gain * m.A) * phi;
  m.K = 0.5 * (m.K + m.K.adjoint());
  m.error_cov = (terms.nu - 2.0 * terms.cross_gain + 1.0) * phi;
  m.error_cov.diagonal().array() += est_noise_var * terms.w_norm2;
  return m;
}

ConditionalModel dd_model(const CMatrix& phi, double rho1, double noise_var, double est_noise_var,
                          ModelSide side) {
  ConditionalModel m;
  m.side = side;
  m.noise_var = noise_var;
  m.cross_gain = rho1;
  m.estimate_cov = phi;
  m.estimate_cov.diagonal().array() += est_noise_var;
  m.A = gain_matrix(rho1, phi, m.estimate_cov);
  m.K = (identity_like(phi) - rho1 * m.A) * phi;
  m.K = 0.5 * (m.K + m.K.adjoint());
  m.error_cov = 2.0 * (1.0 - rho1) * phi;
  m.error_cov.diagonal().array() += est_noise_var;
  return m;
}

ConditionalModel make_model(EstimatorKind estimator, ModelSide side,
                            const SpatialCorrelation& spatial, const SystemConfig& cfg,
                            const RhoFn& rho, int k) {
  const CMatrix& phi = side == ModelSide::Full  ? spatial.phi
                       : side == ModelSide::Zrc ? spatial.phi_t
                                                : spatial.phi_r;
  const double pilot_noise = cfg.noise_var / cfg.pilot_power;
  switch (estimator) {
    case EstimatorKind::MB:
      return mb_model(mb_temporal_terms(k, 0, cfg.frame_len, rho), phi, cfg.noise_var,
                      pilot_noise, side);
    case EstimatorKind::DD: {
      // The transmit-side DD reduction folds X X^H ~ eps_s I into the
      // estimation noise.
      const double est = side == ModelSide::Zrc ? cfg.noise_var / cfg.symbol_power : pilot_noise;
      return dd_model(phi, rho(1), cfg.noise_var, est, side);
    }
    case EstimatorKind::Perfect:
      break;
  }
  raise(ErrorCode::InvalidArgument, "perfect CSI has no conditional model");
}

CVector conditional_mean(const ConditionalModel& model, const CMatrix& x, const CMatrix& h_hat) {
  if (model.side != ModelSide::Full)
    raise(ErrorCode::InvalidArgument, "conditional_mean expects a full-side model");
  const CMatrix g = model.A * vec(h_hat);
  return vec(unvec(g, h_hat.rows(), h_hat.cols()) * x);
}

CMatrix conditional_covariance(const ConditionalModel& model, const CMatrix& x) {
  if (model.side != ModelSide::Full)
    raise(ErrorCode::InvalidArgument, "conditional_covariance expects a full-side model");
  const Eigen::Index nr = model.K.rows() / x.rows();
  const CMatrix xt = kron(x.transpose(), CMatrix::Identity(nr, nr));
  CMatrix c = xt * model.K * xt.adjoint();
  c = 0.5 * (c + c.adjoint());
  c.diagonal().array() += model.noise_var;
  return c;
}

CMatrix model_gain(const ConditionalModel& model, const CMatrix& h_hat) {
  switch (model.side) {
    case ModelSide::Full: return model.A * vec(h_hat);
    case ModelSide::Zrc: return h_hat * model.A.transpose();
    case ModelSide::Ztc: return model.A * h_hat;
  }
  return {};
}

CMatrix ztc_covariance(const ConditionalModel& model, double column_energy) {
  CMatrix c = column_energy * model.K;
  c.diagonal().array() += model.noise_var;
  return c;
}

CandidateStatistics mb_statistics(const CMatrix& x, int k, const CMatrix& h_hat,
                                  const SystemConfig& cfg, const CMatrix& phi, const RhoFn& rho) {
  const ConditionalModel m = mb_model(mb_temporal_terms(k, 0, cfg.frame_len, rho), phi,
                                      cfg.noise_var, cfg.noise_var / cfg.pilot_power);
  CandidateStatistics s;
  s.mean = conditional_mean(m, x, h_hat);
  s.covariance = conditional_covariance(m, x);
  s.log_det = HpdFactor(s.covariance).log_det();
  return s;
}

CandidateStatistics dd_statistics(const CMatrix& x, const CMatrix& h_hat, const SystemConfig& cfg,
                                  const CMatrix& phi, double rho1) {
  const ConditionalModel m = dd_model(phi, rho1, cfg.noise_var, cfg.noise_var / cfg.pilot_power);
  CandidateStatistics s;
  s.mean = conditional_mean(m, x, h_hat);
  s.covariance = conditional_covariance(m, x);
  s.log_det = HpdFactor(s.covariance).log_det();
  return s;
}

CandidateStatistics reduced_statistics(ModelSide side, EstimatorKind estimator, const CMatrix& x,
                                       int k, const CMatrix& h_hat, const SystemConfig& cfg,
                                       const CMatrix& one_sided_phi, const RhoFn& rho) {
  if (side == ModelSide::Full)
    raise(ErrorCode::InvalidArgument, "reduced_statistics expects Zrc or Ztc");
  SpatialCorrelation sc;
  if (side == ModelSide::Zrc)
    sc.phi_t = one_sided_phi;
  else
    sc.phi_r = one_sided_phi;
  const ConditionalModel m = make_model(estimator, side, sc, cfg, rho, k);
  CandidateStatistics s;
  if (side == ModelSide::Zrc) {
    s.mean = vec(model_gain(m, h_hat) * x);
    s.covariance = x.transpose() * m.K * x.conjugate();
    s.covariance = 0.5 * (s.covariance + s.covariance.adjoint());
    s.covariance.diagonal().array() += m.noise_var;
  } else {
    s.mean = vec(model_gain(m, h_hat) * x);
    s.covariance = ztc_covariance(m, cfg.symbol_power);
  }
  s.log_det = HpdFactor(s.covariance).log_det();
  return s;
}

}  // namespace smdet
