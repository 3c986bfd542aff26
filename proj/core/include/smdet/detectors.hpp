#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "smdet/config.hpp"
#include "smdet/corrmodel.hpp"
#include "smdet/linalg.hpp"
#include "smdet/smcodec.hpp"
#include "smdet/statistics.hpp"
#include "smdet/types.hpp"

namespace smdet {

enum class DetectorKind {
  PerfectCSI,
  Mismatched,
  CeeaMlMb,
  CeeaMlDd,
  TwoStageMb,
  TwoStageDd,
  ZrcMb,
  ZtcMb,
  ZrcDd,
  ZtcDd,
  TwoStageZrcMb,
  TwoStageZrcDd,
};

std::string_view to_string(DetectorKind kind);
DetectorKind parse_detector(std::string_view text);
const std::vector<DetectorKind>& all_detector_kinds();

/// Estimator a detector is tied to; nullopt for Mismatched (either works).
std::optional<EstimatorKind> detector_estimator(DetectorKind kind);
bool is_two_stage(DetectorKind kind);
/// Spatial structure of the detector's likelihood; nullopt for the
/// Frobenius-norm detectors.
std::optional<ModelSide> detector_side(DetectorKind kind);

struct Decision {
  SignalBlock block;
  double metric = 0.0;
  std::int64_t index = -1;
  bool pinv_fallback = false;  // two-stage J was singular
};

/// Cached per-(antenna vector, magnitude profile) factors for one conditional
/// model. With X = L Diag(s) and a_j = 1/s_j the general metric becomes
///   logdet C(X) + ||W (a o y - m_bar)||^2,
/// where W whitens C_bar(L, |s|^2) = sigma^2 Diag(1/|s_j|^2) + L^T K L^*.
/// Only L and the magnitude profile enter C_bar, so PSK needs one factor per L.
class SmSearchCache {
 public:
  SmSearchCache(const ConditionalModel& model, const SignalCodec& codec, bool precompute = true);

  const ConditionalModel& model() const { return model_; }
  const SignalCodec& codec() const { return codec_; }
  bool precomputed() const { return precompute_; }

  int n_antenna_vectors() const { return n_l_; }
  int n_profiles() const { return n_profiles_; }
  int n_label_vectors() const { return n_s_; }

  struct Entry {
    CMatrix factor;        // Full: Cholesky lower factor; Zrc: C_bar^{-1}
    double log_det = 0.0;  // logdet of the full-dimension C(X), profile included
  };

  /// Cached entry or, without precompute, a freshly computed one.
  Entry entry(int l_index, int profile) const;

  const std::vector<int>& antennas(int l_index) const { return antenna_table_[l_index]; }
  const std::vector<int>& labels(int s_index) const { return label_table_[s_index]; }
  const std::vector<cplx>& inverse_symbols(int s_index) const { return inv_table_[s_index]; }
  const std::vector<int>& label_vectors_of_profile(int p) const { return by_profile_[p]; }
  int profile_of(int s_index) const { return profile_of_[s_index]; }

 private:
  Entry compute(int l_index, int profile) const;

  ConditionalModel model_;
  SignalCodec codec_;
  bool precompute_;
  int n_l_ = 0;
  int n_s_ = 0;
  int n_profiles_ = 1;
  std::vector<double> magnitudes_;  // distinct |s|^2
  std::vector<std::vector<int>> antenna_table_;
  std::vector<std::vector<int>> label_table_;
  std::vector<std::vector<cplx>> inv_table_;
  std::vector<std::vector<double>> profile_energy_;  // per profile, per slot |s_j|^2
  std::vector<int> profile_of_;
  std::vector<std::vector<int>> by_profile_;
  std::vector<Entry> entries_;
};

/// Exhaustive CEEA-ML / ZRC search over an SM or SSK candidate set.
Decision detect_full_search(const CMatrix& y, const CMatrix& h_hat, const SmSearchCache& cache);
/// Antenna-first two-stage detector (PSK only).
Decision detect_two_stage(const CMatrix& y, const CMatrix& h_hat, const SmSearchCache& cache);

/// Per-candidate factors for arbitrary candidate sets (used for SMX).
class GeneralSearchCache {
 public:
  GeneralSearchCache(const ConditionalModel& model, const SignalCodec& codec,
                     std::int64_t cap = std::int64_t{1} << 16);

  const ConditionalModel& model() const { return model_; }
  const SignalCodec& codec() const { return codec_; }
  std::size_t size() const { return candidates_.size(); }
  const SignalBlock& candidate(std::size_t i) const { return candidates_[i]; }
  const CMatrix& matrix(std::size_t i) const { return matrices_[i]; }
  const HpdFactor& factor(std::size_t i) const { return factors_[i]; }

 private:
  ConditionalModel model_;
  SignalCodec codec_;
  std::vector<SignalBlock> candidates_;
  std::vector<CMatrix> matrices_;
  std::vector<HpdFactor> factors_;
};

Decision detect_general(const CMatrix& y, const CMatrix& h_hat, const GeneralSearchCache& cache);

/// Column-separable minimization of sum_j ||W (y_j - G x_j)||^2, used by the
/// perfect-CSI, mismatched and ZTC detectors. weight==nullptr means W = I.
Decision detect_columnwise(const CMatrix& y, const CMatrix& gain, const SignalCodec& codec,
                           const HpdFactor* weight = nullptr);

struct DetectorSetup {
  SystemConfig cfg;  // noise_var is the operating point
  SignalMode mode = SignalMode::SM;
  SpatialCorrelation spatial;  // receiver-side belief about the correlation
  RhoFn rho;
  std::vector<int> blocks;  // MB data-block indices to prepare; ignored for DD
  bool precompute = true;
};

class Detector {
 public:
  virtual ~Detector() = default;
  DetectorKind kind() const { return kind_; }
  /// h is the channel the detector is given: true H for PerfectCSI, the
  /// current estimate otherwise. k is the window-relative block index.
  virtual Decision detect(const CMatrix& y, const CMatrix& h, int k) const = 0;

 protected:
  explicit Detector(DetectorKind kind) : kind_(kind) {}

 private:
  DetectorKind kind_;
};

/// Builds detectors that share statistics caches where their models agree.
std::vector<std::unique_ptr<Detector>> make_detectors(const std::vector<DetectorKind>& kinds,
                                                      const DetectorSetup& setup);
std::unique_ptr<Detector> make_detector(DetectorKind kind, const DetectorSetup& setup);

}  // namespace smdet
