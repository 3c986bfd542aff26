#include "smdet/analysis.hpp"

#include <algorithm>
#include <map>
#include <cmath>
#include <string>

#include "smdet/errors.hpp"

namespace smdet {

namespace {

CMatrix error_covariance_of_y(const ConditionalModel& model, const CMatrix& x) {
  ConditionalModel m = model;
  m.K = model.error_cov;
  return conditional_covariance(m, x);
}

// P{Q < threshold}, including the deterministic case the CDF cannot express.
double pep_probability(const QuadFormSpec& spec, double tol) {
  bool any = spec.normal_var > 0.0;
  for (double l : spec.eigenvalues) any = any || l != 0.0;
  if (!any) return spec.threshold > 0.0 ? 1.0 : 0.0;
  return quadratic_form_cdf(spec, tol);
}

// Union-bound sampling. The pair sum over H_hat is dominated by rare draws
// where H_hat nearly annihilates the column space of some difference
// X - X' (two columns almost equal, for SM). In whitened coordinates w,
// vec(H_hat) = S w, each such set is a subspace Q. The proposal is a
// defensive mixture: the true law CN(0, I) with weight kDefensive, the rest
// spread over CN(0, I - (1 - c) Q Q^H) for every subspace and each c in
// kShrink. Weights p/q are bounded by 1 / kDefensive.
constexpr double kDefensive = 0.3;
constexpr double kShrink[] = {0.5, 0.2, 0.08, 0.03, 0.01};

struct Subspace {
  CMatrix q;  // dim x r, orthonormal columns
};

std::vector<Subspace> fade_subspaces(const std::vector<CMatrix>& mats, const CMatrix& s,
                                     Eigen::Index n_rx) {
  std::map<std::vector<long long>, Subspace> seen;
  for (std::size_t i = 0; i < mats.size(); ++i)
    for (std::size_t j = i + 1; j < mats.size(); ++j) {
      const CMatrix e = mats[i] - mats[j];
      Eigen::JacobiSVD<CMatrix> svd_e(e, Eigen::ComputeFullU);
      const Eigen::Index rank_e = (svd_e.singularValues().array() > 1e-9 * svd_e.singularValues()(0)).count();
      if (rank_e == 0) continue;
      const CMatrix u = svd_e.matrixU().leftCols(rank_e);
      const CMatrix proj = u * u.adjoint();
      std::vector<long long> key;
      for (Eigen::Index k = 0; k < proj.size(); ++k) {
        key.push_back(std::llround(proj(k).real() * 1e8));
        key.push_back(std::llround(proj(k).imag() * 1e8));
      }
      if (seen.count(key)) continue;
      // H_hat U = 0  <=>  (U^T kron I) S w = 0
      const CMatrix g = kron(u.transpose(), CMatrix::Identity(n_rx, n_rx)) * s;
      Eigen::JacobiSVD<CMatrix> svd_g(g.adjoint(), Eigen::ComputeThinU);
      const RVector& sv = svd_g.singularValues();
      const Eigen::Index r = sv.size() ? (sv.array() > 1e-9 * sv(0)).count() : 0;
      if (r == 0) continue;
      seen.emplace(std::move(key), Subspace{svd_g.matrixU().leftCols(r)});
    }
  std::vector<Subspace> out;
  for (auto& [key, sub] : seen) out.push_back(std::move(sub));
  return out;
}

class FadeMixture {
 public:
  FadeMixture(const std::vector<Subspace>& subs, Eigen::Index dim) : subs_(subs), dim_(dim) {}

  CVector draw(RngStream& rng, double& weight) const {
    const std::size_t n_comp = subs_.size() * std::size(kShrink);
    CVector w = rng.complex_normal(dim_, 1).col(0);
    if (n_comp > 0 && rng.uniform() >= kDefensive) {
      const std::size_t c = std::min<std::size_t>(
          static_cast<std::size_t>(rng.uniform() * n_comp), n_comp - 1);
      const CMatrix& q = subs_[c / std::size(kShrink)].q;
      const double shrink = kShrink[c % std::size(kShrink)];
      w -= (1.0 - std::sqrt(shrink)) * (q * (q.adjoint() * w));
    }
    // q / p averaged over the components, each q_c / p in closed form.
    double ratio = 0.0;
    for (const Subspace& sub : subs_) {
      const double m2 = (sub.q.adjoint() * w).squaredNorm();
      const double r = static_cast<double>(sub.q.cols());
      for (double c : kShrink) ratio += std::exp(-r * std::log(c) - m2 * (1.0 / c - 1.0));
    }
    weight = n_comp > 0 ? 1.0 / (kDefensive + (1.0 - kDefensive) * ratio / n_comp) : 1.0;
    return w;
  }

 private:
  const std::vector<Subspace>& subs_;
  Eigen::Index dim_;
};

McEstimate summarize(const std::vector<double>& v) {
  McEstimate out;
  out.samples = static_cast<int>(v.size());
  if (v.empty()) return out;
  double sum = 0.0;
  for (double x : v) sum += x;
  out.mean = sum / v.size();
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - out.mean) * (x - out.mean);
    out.std_error = std::sqrt(ss / (v.size() - 1) / v.size());
  }
  return out;
}

ConditionalModel mb_full_model(int k, const SystemConfig& cfg, const CMatrix& phi,
                               const RhoFn& rho) {
  return mb_model(mb_temporal_terms(k, 0, cfg.frame_len, rho), phi, cfg.noise_var,
                  cfg.noise_var / cfg.pilot_power, ModelSide::Full);
}

}  // namespace

PairwiseCase::PairwiseCase(const CMatrix& x, const CMatrix& x_alt, const ConditionalModel& model,
                           PepNoiseModel noise)
    : model_(model), x_(x), x_alt_(x_alt), noise_(noise) {
  if (model.side != ModelSide::Full)
    raise(ErrorCode::InvalidArgument, "pairwise analysis expects a full-side model");
  if (x.rows() != x_alt.rows() || x.cols() != x_alt.cols())
    raise(ErrorCode::ShapeMismatch, "candidate blocks differ in shape");
  if ((x - x_alt).cwiseAbs().maxCoeff() == 0.0)
    raise(ErrorCode::InvalidArgument, "pairwise error needs X != X'");
  c_ = HpdFactor(conditional_covariance(model, x));
  c_alt_ = HpdFactor(conditional_covariance(model, x_alt));
  const CMatrix cov =
      noise == PepNoiseModel::ExactConditional ? conditional_covariance(model, x)
                                               : error_covariance_of_y(model, x);
  sqrt_cov_ = HpdFactor(cov).lower();

  const CMatrix w = c_.whiten(sqrt_cov_);
  const CMatrix w_alt = c_alt_.whiten(sqrt_cov_);
  CMatrix m = w_alt.adjoint() * w_alt - w.adjoint() * w;
  m = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m);
  u_ = es.eigenvectors();
  lambda_ = es.eigenvalues();
  const double scale = std::max(w.squaredNorm(), w_alt.squaredNorm());
  quadratic_.resize(lambda_.size());
  for (Eigen::Index i = 0; i < lambda_.size(); ++i)
    quadratic_[i] = std::abs(lambda_(i)) > 1e-9 * scale;
}

QuadFormSpec PairwiseCase::spec(const CMatrix& h_hat) const {
  return spec_from_gain(h_hat, model_.A * vec(h_hat));
}

QuadFormSpec PairwiseCase::spec_from_gain(const CMatrix& h_hat, const CVector& gain) const {
  const CMatrix g = unvec(gain, h_hat.rows(), h_hat.cols());
  const CVector m = vec(g * x_);
  const CVector m_alt = vec(g * x_alt_);
  const CVector mu = noise_ == PepNoiseModel::ExactConditional ? m : CVector(vec(h_hat * x_));
  const CVector r = mu - m;
  const CVector r_alt = mu - m_alt;

  const CVector beta =
      sqrt_cov_.adjoint() * (c_alt_.solve(r_alt) - c_.solve(r));
  const double c0 = c_alt_.quad(r_alt) - c_.quad(r) + c_alt_.log_det() - c_.log_det();
  const CVector b = u_.adjoint() * beta;

  QuadFormSpec s;
  s.threshold = -c0;
  for (Eigen::Index i = 0; i < lambda_.size(); ++i) {
    if (quadratic_[i]) {
      s.eigenvalues.push_back(lambda_(i));
      s.shifts.push_back(b(i) / lambda_(i));
      s.threshold += std::norm(b(i)) / lambda_(i);
    } else {
      s.normal_var += 2.0 * std::norm(b(i));
    }
  }
  return s;
}

double pep_conditional(const CMatrix& x, const CMatrix& x_alt, const CMatrix& h_hat,
                       const ConditionalModel& model, PepNoiseModel noise, double tol) {
  const PairwiseCase pc(x, x_alt, model, noise);
  return pep_probability(pc.spec(h_hat), tol);
}

double pep_conditional(const CMatrix& x, const CMatrix& x_alt, int k, const CMatrix& h_hat,
                       const SystemConfig& cfg, const CMatrix& phi, const RhoFn& rho,
                       PepNoiseModel noise) {
  return pep_conditional(x, x_alt, h_hat, mb_full_model(k, cfg, phi, rho), noise);
}

McEstimate pep_average(const CMatrix& x, const CMatrix& x_alt, const ConditionalModel& model,
                       int n_mc, RngStream& rng, PepNoiseModel noise) {
  if (n_mc < 100) raise(ErrorCode::InvalidArgument, "pep_average needs n_mc >= 100");
  const PairwiseCase pc(x, x_alt, model, noise);
  const CMatrix s = psd_sqrt(model.estimate_cov);
  const Eigen::Index nr = model.K.rows() / x.rows();
  const Eigen::Index nt = x.rows();
  std::vector<double> v;
  v.reserve(n_mc);
  for (int i = 0; i < n_mc; ++i) {
    const CMatrix h_hat = unvec(s * rng.complex_normal(s.rows(), 1), nr, nt);
    v.push_back(pep_probability(pc.spec(h_hat), 1e-8));
  }
  return summarize(v);
}

McEstimate pep_average(const CMatrix& x, const CMatrix& x_alt, int k, const SystemConfig& cfg,
                       const CMatrix& phi, const RhoFn& rho, int n_mc, RngStream& rng,
                       PepNoiseModel noise) {
  return pep_average(x, x_alt, mb_full_model(k, cfg, phi, rho), n_mc, rng, noise);
}

UnionBound ber_union_bound(const ConditionalModel& model, const SignalCodec& codec,
                           RngStream& rng, const UnionBoundOptions& opts) {
  if (opts.n_mc < 1) raise(ErrorCode::InvalidArgument, "union bound needs n_mc >= 1");
  const std::int64_t n_c = codec.candidate_count();
  if (n_c > opts.max_candidates)
    raise(ErrorCode::SearchSpaceTooLarge,
          "union bound over " + std::to_string(n_c) + " candidates exceeds the pair guard");
  UnionBound out;
  if (n_c <= 1) return out;

  const std::vector<SignalBlock> cands = codec.enumerate(opts.max_candidates);
  std::vector<CMatrix> mats;
  for (const SignalBlock& b : cands) mats.push_back(codec.matrix(b));

  struct Pair {
    int weight;
    PairwiseCase pc;
  };
  std::vector<Pair> pairs;
  for (std::size_t i = 0; i < cands.size(); ++i)
    for (std::size_t j = 0; j < cands.size(); ++j) {
      if (i == j) continue;
      const int d = codec.hamming(cands[i], cands[j]);
      if (d == 0) continue;
      pairs.push_back({d, PairwiseCase(mats[i], mats[j], model, opts.noise)});
    }

  const SystemConfig& cfg = codec.config();
  const double norm = static_cast<double>(n_c) * codec.bits_per_block();
  const CMatrix s = psd_sqrt(model.estimate_cov);
  const Eigen::Index dim = s.rows();
  const std::vector<Subspace> subspaces = fade_subspaces(mats, s, cfg.n_rx);
  const FadeMixture mix(subspaces, dim);
  std::vector<double> samples;
  samples.reserve(opts.n_mc);
  for (int t = 0; t < opts.n_mc; ++t) {
    double weight = 1.0;
    const CVector w = mix.draw(rng, weight);
    const CMatrix h_hat = unvec(s * w, cfg.n_rx, cfg.n_tx);
    const CVector gain = model.A * vec(h_hat);
    double sum = 0.0;
    for (const Pair& p : pairs)
      sum += p.weight * pep_probability(p.pc.spec_from_gain(h_hat, gain), opts.cdf_tol);
    samples.push_back(weight * sum / norm);
  }
  const McEstimate e = summarize(samples);
  const double mean = e.mean;
  out.std_error = e.std_error;
  out.unclipped = mean;
  out.value = std::min(1.0, mean);
  return out;
}

UnionBound ber_union_bound(int k, const SystemConfig& cfg, SignalMode mode, const CMatrix& phi,
                           const RhoFn& rho, RngStream& rng, const UnionBoundOptions& opts) {
  return ber_union_bound(mb_full_model(k, cfg, phi, rho), SignalCodec(cfg, mode), rng, opts);
}

std::vector<int> averaged_block_indices(EstimatorKind estimator, int frame_len) {
  if (frame_len < 2) raise(ErrorCode::InvalidArgument, "frame length must be >= 2");
  std::vector<int> out;
  if (estimator == EstimatorKind::MB) {
    for (int k = 1; k <= 2 * frame_len - 1; ++k)
      if (k != frame_len) out.push_back(k);
  } else {
    for (int k = 1; k <= frame_len - 1; ++k) out.push_back(k);
  }
  return out;
}

double ber_average(const std::map<int, double>& per_k, EstimatorKind estimator, int frame_len) {
  const std::vector<int> idx = averaged_block_indices(estimator, frame_len);
  double sum = 0.0;
  for (int k : idx) {
    const auto it = per_k.find(k);
    if (it == per_k.end())
      raise(ErrorCode::MissingBlockIndex, "missing BER for block " + std::to_string(k));
    sum += it->second;
  }
  return sum / static_cast<double>(idx.size());
}

BerBound ber_bound_curve(EstimatorKind estimator, const SystemConfig& cfg, SignalMode mode,
                         const SpatialCorrelation& spatial, const RhoFn& rho, RngStream& rng,
                         const UnionBoundOptions& opts) {
  if (estimator == EstimatorKind::Perfect)
    raise(ErrorCode::InvalidArgument, "bounds are defined for the MB and DD estimators");
  const SignalCodec codec(cfg, mode);
  BerBound out;
  out.cfg = cfg;
  out.estimator = estimator;
  std::map<int, double> values;
  for (int k : averaged_block_indices(estimator, cfg.frame_len)) {
    UnionBound b;
    if (estimator == EstimatorKind::MB && k > cfg.frame_len) {
      b = out.per_k.at(2 * cfg.frame_len - k);
    } else if (estimator == EstimatorKind::DD && !out.per_k.empty()) {
      b = out.per_k.begin()->second;
    } else {
      const ConditionalModel m = make_model(estimator, ModelSide::Full, spatial, cfg, rho, k);
      b = ber_union_bound(m, codec, rng, opts);
    }
    out.per_k[k] = b;
    values[k] = b.value;
  }
  out.average = ber_average(values, estimator, cfg.frame_len);
  return out;
}

}  // namespace smdet
