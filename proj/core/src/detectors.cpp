#include "smdet/detectors.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <tuple>

#include "smdet/errors.hpp"

namespace smdet {

namespace {

struct KindInfo {
  DetectorKind kind;
  const char* name;
};

constexpr KindInfo kKinds[] = {
    {DetectorKind::PerfectCSI, "perfect-csi"},
    {DetectorKind::Mismatched, "mismatched"},
    {DetectorKind::CeeaMlMb, "ceea-ml-mb"},
    {DetectorKind::CeeaMlDd, "ceea-ml-dd"},
    {DetectorKind::TwoStageMb, "two-stage-mb"},
    {DetectorKind::TwoStageDd, "two-stage-dd"},
    {DetectorKind::ZrcMb, "zrc-mb"},
    {DetectorKind::ZtcMb, "ztc-mb"},
    {DetectorKind::ZrcDd, "zrc-dd"},
    {DetectorKind::ZtcDd, "ztc-dd"},
    {DetectorKind::TwoStageZrcMb, "two-stage-zrc-mb"},
    {DetectorKind::TwoStageZrcDd, "two-stage-zrc-dd"},
};

}  // namespace

std::string_view to_string(DetectorKind kind) {
  for (const auto& k : kKinds)
    if (k.kind == kind) return k.name;
  return "unknown";
}

DetectorKind parse_detector(std::string_view text) {
  for (const auto& k : kKinds)
    if (text == k.name) return k.kind;
  raise(ErrorCode::InvalidArgument, "unknown detector '" + std::string(text) + "'");
}

const std::vector<DetectorKind>& all_detector_kinds() {
  static const std::vector<DetectorKind> kinds = [] {
    std::vector<DetectorKind> v;
    for (const auto& k : kKinds) v.push_back(k.kind);
    return v;
  }();
  return kinds;
}

std::optional<EstimatorKind> detector_estimator(DetectorKind kind) {
  switch (kind) {
    case DetectorKind::PerfectCSI: return EstimatorKind::Perfect;
    case DetectorKind::Mismatched: return std::nullopt;
    case DetectorKind::CeeaMlMb:
    case DetectorKind::TwoStageMb:
    case DetectorKind::ZrcMb:
    case DetectorKind::ZtcMb:
    case DetectorKind::TwoStageZrcMb: return EstimatorKind::MB;
    case DetectorKind::CeeaMlDd:
    case DetectorKind::TwoStageDd:
    case DetectorKind::ZrcDd:
    case DetectorKind::ZtcDd:
    case DetectorKind::TwoStageZrcDd: return EstimatorKind::DD;
  }
  return std::nullopt;
}

bool is_two_stage(DetectorKind kind) {
  return kind == DetectorKind::TwoStageMb || kind == DetectorKind::TwoStageDd ||
         kind == DetectorKind::TwoStageZrcMb || kind == DetectorKind::TwoStageZrcDd;
}

std::optional<ModelSide> detector_side(DetectorKind kind) {
  switch (kind) {
    case DetectorKind::CeeaMlMb:
    case DetectorKind::CeeaMlDd:
    case DetectorKind::TwoStageMb:
    case DetectorKind::TwoStageDd: return ModelSide::Full;
    case DetectorKind::ZrcMb:
    case DetectorKind::ZrcDd:
    case DetectorKind::TwoStageZrcMb:
    case DetectorKind::TwoStageZrcDd: return ModelSide::Zrc;
    case DetectorKind::ZtcMb:
    case DetectorKind::ZtcDd: return ModelSide::Ztc;
    default: return std::nullopt;
  }
}

// ---------------------------------------------------------------------------
// SmSearchCache

namespace {

std::vector<int> decode_digits(std::int64_t index, int base, int width) {
  std::vector<int> out(width, 0);
  for (int j = width - 1; j >= 0; --j) {
    out[j] = static_cast<int>(index % base);
    index /= base;
  }
  return out;
}

std::int64_t ipow(std::int64_t b, int e) {
  std::int64_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

}  // namespace

SmSearchCache::SmSearchCache(const ConditionalModel& model, const SignalCodec& codec,
                             bool precompute)
    : model_(model), codec_(codec), precompute_(precompute) {
  if (codec.mode() == SignalMode::SMX)
    raise(ErrorCode::InvalidArgument, "SM search cache does not cover SMX candidates");
  if (model.side == ModelSide::Ztc)
    raise(ErrorCode::InvalidArgument, "SM search cache expects a Full or Zrc model");
  const SystemConfig& cfg = codec.config();
  const int nb = cfg.block_len;

  std::vector<cplx> alphabet;
  if (codec.mode() == SignalMode::SSK)
    alphabet.push_back(codec.ssk_symbol());
  else
    alphabet = codec.constellation().points;
  const int na = static_cast<int>(alphabet.size());

  const std::int64_t n_l = ipow(cfg.n_tx, nb);
  const std::int64_t n_s = ipow(na, nb);
  if (n_l * n_s > (std::int64_t{1} << 24))
    raise(ErrorCode::SearchSpaceTooLarge, "SM candidate set too large for exhaustive search");
  n_l_ = static_cast<int>(n_l);
  n_s_ = static_cast<int>(n_s);

  std::vector<int> mag_of(na, 0);
  for (int i = 0; i < na; ++i) {
    const double e = std::norm(alphabet[i]);
    int found = -1;
    for (std::size_t m = 0; m < magnitudes_.size(); ++m)
      if (std::abs(magnitudes_[m] - e) <= 1e-9 * cfg.symbol_power) found = static_cast<int>(m);
    if (found < 0) {
      found = static_cast<int>(magnitudes_.size());
      magnitudes_.push_back(e);
    }
    mag_of[i] = found;
  }
  const int n_mag = static_cast<int>(magnitudes_.size());
  n_profiles_ = static_cast<int>(ipow(n_mag, nb));

  antenna_table_.reserve(n_l_);
  for (int l = 0; l < n_l_; ++l) antenna_table_.push_back(decode_digits(l, cfg.n_tx, nb));

  profile_energy_.resize(n_profiles_);
  for (int p = 0; p < n_profiles_; ++p) {
    const std::vector<int> digits = decode_digits(p, n_mag, nb);
    for (int d : digits) profile_energy_[p].push_back(magnitudes_[d]);
  }

  label_table_.reserve(n_s_);
  inv_table_.reserve(n_s_);
  profile_of_.resize(n_s_);
  by_profile_.resize(n_profiles_);
  for (int s = 0; s < n_s_; ++s) {
    std::vector<int> digits = decode_digits(s, na, nb);
    std::vector<cplx> inv(nb);
    int p = 0;
    for (int j = 0; j < nb; ++j) {
      inv[j] = 1.0 / alphabet[digits[j]];
      p = p * n_mag + mag_of[digits[j]];
    }
    profile_of_[s] = p;
    by_profile_[p].push_back(s);
    label_table_.push_back(std::move(digits));
    inv_table_.push_back(std::move(inv));
  }

  if (precompute_) {
    entries_.reserve(static_cast<std::size_t>(n_l_) * n_profiles_);
    for (int l = 0; l < n_l_; ++l)
      for (int p = 0; p < n_profiles_; ++p) entries_.push_back(compute(l, p));
  }
}

SmSearchCache::Entry SmSearchCache::entry(int l_index, int profile) const {
  if (precompute_) return entries_[static_cast<std::size_t>(l_index) * n_profiles_ + profile];
  return compute(l_index, profile);
}

SmSearchCache::Entry SmSearchCache::compute(int l_index, int profile) const {
  const SystemConfig& cfg = codec_.config();
  const int nb = cfg.block_len;
  const int nr = cfg.n_rx;
  const std::vector<int>& ant = antenna_table_[l_index];
  const std::vector<double>& e = profile_energy_[profile];
  double log_e = 0.0;
  for (double v : e) log_e += std::log(v);

  Entry out;
  if (model_.side == ModelSide::Full) {
    CMatrix c(nb * nr, nb * nr);
    for (int j = 0; j < nb; ++j)
      for (int jp = 0; jp < nb; ++jp)
        c.block(j * nr, jp * nr, nr, nr) = model_.K.block(ant[j] * nr, ant[jp] * nr, nr, nr);
    for (int j = 0; j < nb; ++j)
      c.block(j * nr, j * nr, nr, nr).diagonal().array() += model_.noise_var / e[j];
    const HpdFactor f(c);
    out.factor = f.lower();
    out.log_det = f.log_det() + nr * log_e;
  } else {
    CMatrix c(nb, nb);
    for (int j = 0; j < nb; ++j)
      for (int jp = 0; jp < nb; ++jp) c(j, jp) = model_.K(ant[j], ant[jp]);
    for (int j = 0; j < nb; ++j) c(j, j) += model_.noise_var / e[j];
    const HpdFactor f(c);
    out.factor = f.inverse();
    out.log_det = nr * (f.log_det() + log_e);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fast SM search

namespace {

// J, b, c of the per-L quadratic  a^H J a - 2 Re(a^H b) + c.
struct Quadratic {
  CMatrix J;
  CVector b;
  double c = 0.0;
};

Quadratic full_quadratic(const CMatrix& y, const CVector& g, const std::vector<int>& ant,
                         const CMatrix& lower, int nr) {
  const int nb = static_cast<int>(ant.size());
  CMatrix diag_y = CMatrix::Zero(nb * nr, nb);
  CVector mbar(nb * nr);
  for (int j = 0; j < nb; ++j) {
    diag_y.block(j * nr, j, nr, 1) = y.col(j);
    mbar.segment(j * nr, nr) = g.segment(ant[j] * nr, nr);
  }
  const auto tri = lower.triangularView<Eigen::Lower>();
  const CMatrix u = tri.solve(diag_y);
  const CVector v = tri.solve(mbar);
  Quadratic q;
  q.J = u.adjoint() * u;
  q.b = u.adjoint() * v;
  q.c = v.squaredNorm();
  return q;
}

Quadratic zrc_quadratic(const CMatrix& y, const CMatrix& yhy, const CMatrix& g,
                        const std::vector<int>& ant, const CMatrix& cinv) {
  const int nb = static_cast<int>(ant.size());
  const Eigen::Index nr = y.rows();
  CMatrix mbar(nr, nb);
  for (int j = 0; j < nb; ++j) mbar.col(j) = g.col(ant[j]);
  const CMatrix qm = cinv * mbar.transpose();  // B x N_R
  Quadratic q;
  q.J = cinv.cwiseProduct(yhy);
  q.b = CVector::Zero(nb);
  for (int j = 0; j < nb; ++j)
    for (Eigen::Index n = 0; n < nr; ++n) q.b(j) += std::conj(y(n, j)) * qm(j, n);
  double c = 0.0;
  for (int j = 0; j < nb; ++j)
    for (Eigen::Index n = 0; n < nr; ++n) c += (std::conj(mbar(n, j)) * qm(j, n)).real();
  q.c = c;
  return q;
}

double evaluate(const Quadratic& q, const std::vector<cplx>& a) {
  const int nb = static_cast<int>(a.size());
  double quad = 0.0;
  double lin = 0.0;
  for (int j = 0; j < nb; ++j) {
    quad += q.J(j, j).real() * std::norm(a[j]);
    cplx row = 0.0;
    for (int jp = j + 1; jp < nb; ++jp) row += q.J(j, jp) * a[jp];
    quad += 2.0 * (std::conj(a[j]) * row).real();
    lin += (std::conj(a[j]) * q.b(j)).real();
  }
  return quad - 2.0 * lin + q.c;
}

struct SearchContext {
  CVector g_full;
  CMatrix g_zrc;
  CMatrix yhy;
};

SearchContext make_context(const CMatrix& y, const CMatrix& h_hat, const ConditionalModel& m) {
  SearchContext ctx;
  if (m.side == ModelSide::Full) {
    ctx.g_full = m.A * vec(h_hat);
  } else {
    ctx.g_zrc = model_gain(m, h_hat);
    ctx.yhy = y.adjoint() * y;
  }
  return ctx;
}

Quadratic quadratic_for(const CMatrix& y, const SearchContext& ctx, const SmSearchCache& cache,
                        int l, const SmSearchCache::Entry& e) {
  if (cache.model().side == ModelSide::Full)
    return full_quadratic(y, ctx.g_full, cache.antennas(l), e.factor,
                          cache.codec().config().n_rx);
  return zrc_quadratic(y, ctx.yhy, ctx.g_zrc, cache.antennas(l), e.factor);
}

void check_block_shape(const CMatrix& y, const CMatrix& h, const SystemConfig& cfg) {
  if (y.rows() != cfg.n_rx || y.cols() != cfg.block_len)
    raise(ErrorCode::ShapeMismatch, "received block must be N_R x B");
  if (h.rows() != cfg.n_rx || h.cols() != cfg.n_tx)
    raise(ErrorCode::ShapeMismatch, "channel must be N_R x N_T");
}

}  // namespace

Decision detect_full_search(const CMatrix& y, const CMatrix& h_hat, const SmSearchCache& cache) {
  check_block_shape(y, h_hat, cache.codec().config());
  const SearchContext ctx = make_context(y, h_hat, cache.model());
  const int n_s = cache.n_label_vectors();
  double best = std::numeric_limits<double>::infinity();
  std::int64_t best_index = -1;
  int best_l = -1;
  int best_s = -1;
  for (int l = 0; l < cache.n_antenna_vectors(); ++l) {
    for (int p = 0; p < cache.n_profiles(); ++p) {
      const std::vector<int>& members = cache.label_vectors_of_profile(p);
      if (members.empty()) continue;
      const SmSearchCache::Entry e = cache.entry(l, p);
      const Quadratic q = quadratic_for(y, ctx, cache, l, e);
      for (int s : members) {
        const double metric = e.log_det + evaluate(q, cache.inverse_symbols(s));
        if (!std::isfinite(metric))
          raise(ErrorCode::NotPositiveDefinite, "non-finite detection metric");
        const std::int64_t index = static_cast<std::int64_t>(l) * n_s + s;
        if (metric < best || (metric == best && index < best_index)) {
          best = metric;
          best_index = index;
          best_l = l;
          best_s = s;
        }
      }
    }
  }
  if (best_index < 0) raise(ErrorCode::EmptyCandidateSet, "no candidates to search");
  Decision d;
  d.block.antenna = cache.antennas(best_l);
  d.block.label = cache.labels(best_s);
  d.metric = best;
  d.index = cache.codec().index_of(d.block);
  return d;
}

Decision detect_two_stage(const CMatrix& y, const CMatrix& h_hat, const SmSearchCache& cache) {
  const SignalCodec& codec = cache.codec();
  if (codec.mode() != SignalMode::SM || !codec.constellation().constant_modulus())
    raise(ErrorCode::InvalidArgument, "two-stage detection requires PSK spatial modulation");
  check_block_shape(y, h_hat, codec.config());
  const SearchContext ctx = make_context(y, h_hat, cache.model());
  const Constellation& cons = codec.constellation();
  const double eps = codec.config().symbol_power;
  const int nb = codec.config().block_len;

  double best = std::numeric_limits<double>::infinity();
  int best_l = -1;
  std::vector<int> best_labels;
  bool fallback = false;
  for (int l = 0; l < cache.n_antenna_vectors(); ++l) {
    const SmSearchCache::Entry e = cache.entry(l, 0);
    const Quadratic q = quadratic_for(y, ctx, cache, l, e);

    // Stage 1: unconstrained minimizer a = J^{-1} b, pseudo-inverse if J is singular.
    Eigen::SelfAdjointEigenSolver<CMatrix> es(q.J);
    const RVector& lam = es.eigenvalues();
    const double lam_max = lam.cwiseAbs().maxCoeff();
    CVector a = CVector::Zero(nb);
    const CVector proj = es.eigenvectors().adjoint() * q.b;
    for (int i = 0; i < nb; ++i) {
      if (lam(i) > 1e-10 * lam_max && lam(i) > 0.0)
        a += es.eigenvectors().col(i) * (proj(i) / lam(i));
      else
        fallback = true;
    }

    std::vector<int> labels(nb);
    std::vector<cplx> abar(nb);
    for (int j = 0; j < nb; ++j) {
      labels[j] = cons.nearest(eps * std::conj(a(j)));
      abar[j] = 1.0 / cons.points[labels[j]];
    }
    const double score = e.log_det + evaluate(q, abar);
    if (!std::isfinite(score)) raise(ErrorCode::NotPositiveDefinite, "non-finite detection metric");
    if (score < best) {
      best = score;
      best_l = l;
      best_labels = labels;
    }
  }
  if (best_l < 0) raise(ErrorCode::EmptyCandidateSet, "no antenna vectors to search");
  Decision d;
  d.block.antenna = cache.antennas(best_l);
  d.block.label = best_labels;
  d.metric = best;
  d.index = codec.index_of(d.block);
  d.pinv_fallback = fallback;
  return d;
}

// ---------------------------------------------------------------------------
// General per-candidate search

GeneralSearchCache::GeneralSearchCache(const ConditionalModel& model, const SignalCodec& codec,
                                       std::int64_t cap)
    : model_(model), codec_(codec) {
  if (model.side == ModelSide::Ztc)
    raise(ErrorCode::InvalidArgument, "general search expects a Full or Zrc model");
  candidates_ = codec.enumerate(cap);
  matrices_.reserve(candidates_.size());
  factors_.reserve(candidates_.size());
  for (const SignalBlock& b : candidates_) {
    const CMatrix x = codec.matrix(b);
    matrices_.push_back(x);
    if (model.side == ModelSide::Full) {
      factors_.emplace_back(conditional_covariance(model, x));
    } else {
      CMatrix c = x.transpose() * model.K * x.conjugate();
      c = 0.5 * (c + c.adjoint());
      c.diagonal().array() += model.noise_var;
      factors_.emplace_back(c);
    }
  }
}

Decision detect_general(const CMatrix& y, const CMatrix& h_hat, const GeneralSearchCache& cache) {
  const SystemConfig& cfg = cache.codec().config();
  check_block_shape(y, h_hat, cfg);
  const ConditionalModel& m = cache.model();
  const CMatrix g = m.side == ModelSide::Full ? unvec(model_gain(m, h_hat), cfg.n_rx, cfg.n_tx)
                                              : model_gain(m, h_hat);
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_i = 0;
  bool any = false;
  for (std::size_t i = 0; i < cache.size(); ++i) {
    const CMatrix r = y - g * cache.matrix(i);
    const HpdFactor& f = cache.factor(i);
    double metric;
    if (m.side == ModelSide::Full)
      metric = f.log_det() + f.quad(CVector(vec(r)));
    else
      metric = cfg.n_rx * f.log_det() + f.whiten(r.transpose()).squaredNorm();
    if (!std::isfinite(metric)) raise(ErrorCode::NotPositiveDefinite, "non-finite metric");
    if (metric < best) {
      best = metric;
      best_i = i;
      any = true;
    }
  }
  if (!any) raise(ErrorCode::EmptyCandidateSet, "no candidates to search");
  Decision d;
  d.block = cache.candidate(best_i);
  d.metric = best;
  d.index = cache.codec().index_of(d.block);
  return d;
}

// ---------------------------------------------------------------------------
// Column-separable search

Decision detect_columnwise(const CMatrix& y, const CMatrix& gain, const SignalCodec& codec,
                           const HpdFactor* weight) {
  const SystemConfig& cfg = codec.config();
  check_block_shape(y, gain, cfg);
  const CMatrix wy = weight ? weight->whiten(y) : y;
  const CMatrix wg = weight ? weight->whiten(gain) : gain;
  const Constellation& cons = codec.constellation();

  // Column alphabet in lexicographic order, with its image under W G.
  std::vector<std::vector<int>> entries;  // SM/SSK: {antenna, label}; SMX: labels per row
  CMatrix images;
  if (codec.mode() == SignalMode::SMX) {
    const int n = static_cast<int>(ipow(cfg.mod_order, cfg.n_tx));
    images.resize(cfg.n_rx, n);
    for (int i = 0; i < n; ++i) {
      std::vector<int> labels = decode_digits(i, cfg.mod_order, cfg.n_tx);
      CVector x(cfg.n_tx);
      for (int t = 0; t < cfg.n_tx; ++t) x(t) = cons.points[labels[t]];
      images.col(i) = wg * x;
      entries.push_back(std::move(labels));
    }
  } else {
    const bool ssk = codec.mode() == SignalMode::SSK;
    const int per = ssk ? 1 : cfg.mod_order;
    images.resize(cfg.n_rx, cfg.n_tx * per);
    for (int l = 0; l < cfg.n_tx; ++l)
      for (int s = 0; s < per; ++s) {
        const cplx sym = ssk ? codec.ssk_symbol() : cons.points[s];
        images.col(l * per + s) = wg.col(l) * sym;
        entries.push_back({l, s});
      }
  }

  Decision d;
  d.metric = weight ? cfg.n_tx * weight->log_det() : 0.0;
  if (codec.mode() != SignalMode::SMX) {
    d.block.antenna.resize(cfg.block_len);
    d.block.label.resize(cfg.block_len);
  }
  for (int j = 0; j < cfg.block_len; ++j) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_i = 0;
    for (Eigen::Index i = 0; i < images.cols(); ++i) {
      const double v = (wy.col(j) - images.col(i)).squaredNorm();
      if (v < best) {
        best = v;
        best_i = static_cast<std::size_t>(i);
      }
    }
    d.metric += best;
    if (codec.mode() == SignalMode::SMX) {
      for (int l : entries[best_i]) d.block.label.push_back(l);
    } else {
      d.block.antenna[j] = entries[best_i][0];
      d.block.label[j] = entries[best_i][1];
    }
  }
  d.index = codec.index_of(d.block);
  return d;
}

// ---------------------------------------------------------------------------
// Detector objects

namespace {

template <typename T>
class PerBlock {
 public:
  PerBlock() = default;
  PerBlock(bool block_free, std::vector<std::shared_ptr<const T>> items)
      : block_free_(block_free), items_(std::move(items)) {}

  const T& at(int k) const {
    if (block_free_) return *items_.front();
    if (k < 0 || static_cast<std::size_t>(k) >= items_.size() || !items_[k])
      raise(ErrorCode::MissingBlockIndex, "no statistics prepared for block " + std::to_string(k));
    return *items_[k];
  }

 private:
  bool block_free_ = true;
  std::vector<std::shared_ptr<const T>> items_;
};

class FrobeniusDetector final : public Detector {
 public:
  FrobeniusDetector(DetectorKind kind, SignalCodec codec) : Detector(kind), codec_(std::move(codec)) {}
  Decision detect(const CMatrix& y, const CMatrix& h, int) const override {
    return detect_columnwise(y, h, codec_);
  }

 private:
  SignalCodec codec_;
};

struct ZtcStats {
  ConditionalModel model;
  HpdFactor weight;
};

class ZtcDetector final : public Detector {
 public:
  ZtcDetector(DetectorKind kind, SignalCodec codec, PerBlock<ZtcStats> stats)
      : Detector(kind), codec_(std::move(codec)), stats_(std::move(stats)) {}
  Decision detect(const CMatrix& y, const CMatrix& h, int k) const override {
    const ZtcStats& s = stats_.at(k);
    return detect_columnwise(y, model_gain(s.model, h), codec_, &s.weight);
  }

 private:
  SignalCodec codec_;
  PerBlock<ZtcStats> stats_;
};

class SmDetector final : public Detector {
 public:
  SmDetector(DetectorKind kind, PerBlock<SmSearchCache> caches, bool two_stage)
      : Detector(kind), caches_(std::move(caches)), two_stage_(two_stage) {}
  Decision detect(const CMatrix& y, const CMatrix& h, int k) const override {
    const SmSearchCache& c = caches_.at(k);
    return two_stage_ ? detect_two_stage(y, h, c) : detect_full_search(y, h, c);
  }

 private:
  PerBlock<SmSearchCache> caches_;
  bool two_stage_;
};

class GeneralDetector final : public Detector {
 public:
  GeneralDetector(DetectorKind kind, PerBlock<GeneralSearchCache> caches)
      : Detector(kind), caches_(std::move(caches)) {}
  Decision detect(const CMatrix& y, const CMatrix& h, int k) const override {
    return detect_general(y, h, caches_.at(k));
  }

 private:
  PerBlock<GeneralSearchCache> caches_;
};

// MB statistics for blocks k and 2N - k coincide (the interpolation weights
// and the temporal terms are mirror images), so those share one entry.
template <typename T, typename Build>
PerBlock<T> build_per_block(EstimatorKind est, const std::vector<int>& blocks, int frame_len,
                            Build build) {
  if (est == EstimatorKind::DD) return PerBlock<T>(true, {std::make_shared<const T>(build(0))});
  if (blocks.empty()) raise(ErrorCode::MissingBlockIndex, "MB detectors need block indices");
  int max_k = 0;
  for (int k : blocks) {
    if (k < 0 || k > 2 * frame_len)
      raise(ErrorCode::MissingBlockIndex, "block " + std::to_string(k) + " is outside the MB window");
    max_k = std::max(max_k, k);
  }
  std::vector<std::shared_ptr<const T>> items(static_cast<std::size_t>(max_k) + 1);
  for (int k : blocks) {
    if (items[k]) continue;
    const int mirror = 2 * frame_len - k;
    if (mirror <= max_k && items[mirror])
      items[k] = items[mirror];
    else
      items[k] = std::make_shared<const T>(build(k));
    if (mirror <= max_k && !items[mirror]) items[mirror] = items[k];
  }
  return PerBlock<T>(false, std::move(items));
}

}  // namespace

std::vector<std::unique_ptr<Detector>> make_detectors(const std::vector<DetectorKind>& kinds,
                                                      const DetectorSetup& setup) {
  setup.cfg.validate();
  const SignalCodec codec(setup.cfg, setup.mode);
  std::map<std::tuple<int, int>, PerBlock<SmSearchCache>> sm_caches;
  std::map<std::tuple<int, int>, PerBlock<GeneralSearchCache>> general_caches;

  std::vector<std::unique_ptr<Detector>> out;
  for (DetectorKind kind : kinds) {
    if (kind == DetectorKind::PerfectCSI || kind == DetectorKind::Mismatched) {
      out.push_back(std::make_unique<FrobeniusDetector>(kind, codec));
      continue;
    }
    const EstimatorKind est = *detector_estimator(kind);
    const ModelSide side = *detector_side(kind);
    if (!setup.rho) raise(ErrorCode::InvalidArgument, "detector setup needs a temporal model");
    auto model_at = [&](int k) { return make_model(est, side, setup.spatial, setup.cfg, setup.rho, k); };

    if (is_two_stage(kind) &&
        (setup.mode != SignalMode::SM || setup.cfg.mod_kind != ModKind::PSK))
      raise(ErrorCode::InvalidArgument,
            std::string(to_string(kind)) + " requires PSK spatial modulation");

    if (side == ModelSide::Ztc) {
      const double energy = setup.mode == SignalMode::SMX ? setup.cfg.n_tx * setup.cfg.symbol_power
                                                          : setup.cfg.symbol_power;
      auto stats = build_per_block<ZtcStats>(est, setup.blocks, setup.cfg.frame_len, [&](int k) {
        ZtcStats s{model_at(k), HpdFactor()};
        s.weight = HpdFactor(ztc_covariance(s.model, energy));
        return s;
      });
      out.push_back(std::make_unique<ZtcDetector>(kind, codec, std::move(stats)));
      continue;
    }

    const auto key = std::make_tuple(static_cast<int>(est), static_cast<int>(side));
    if (setup.mode == SignalMode::SMX) {
      auto it = general_caches.find(key);
      if (it == general_caches.end())
        it = general_caches
                 .emplace(key, build_per_block<GeneralSearchCache>(est, setup.blocks, setup.cfg.frame_len, [&](int k) {
                   return GeneralSearchCache(model_at(k), codec);
                 }))
                 .first;
      out.push_back(std::make_unique<GeneralDetector>(kind, it->second));
      continue;
    }
    auto it = sm_caches.find(key);
    if (it == sm_caches.end())
      it = sm_caches
               .emplace(key, build_per_block<SmSearchCache>(est, setup.blocks, setup.cfg.frame_len, [&](int k) {
                 return SmSearchCache(model_at(k), codec, setup.precompute);
               }))
               .first;
    out.push_back(std::make_unique<SmDetector>(kind, it->second, is_two_stage(kind)));
  }
  return out;
}

std::unique_ptr<Detector> make_detector(DetectorKind kind, const DetectorSetup& setup) {
  auto v = make_detectors({kind}, setup);
  return std::move(v.front());
}

}  // namespace smdet
