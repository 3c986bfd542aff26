#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "smdet/config.hpp"
#include "smdet/types.hpp"

namespace smdet {

using Bits = std::vector<std::uint8_t>;

/// Points are stored by bit label: points[label] is the symbol carrying that
/// Gray label.
struct Constellation {
  ModKind kind = ModKind::PSK;
  int order = 2;
  double power = 1.0;
  std::vector<cplx> points;

  int bits() const;
  /// Label of the nearest point; ties go to the smaller label.
  int nearest(cplx z) const;
  /// Label of an exact member (within tol), or -1.
  int find(cplx z, double tol = 1e-9) const;
  bool constant_modulus() const { return kind == ModKind::PSK; }
};

Constellation build_constellation(ModKind kind, int order, double symbol_power);

std::uint32_t gray_encode(std::uint32_t v);

enum class SignalMode { SM, SMX, SSK };

std::string_view to_string(SignalMode mode);
SignalMode parse_signal_mode(std::string_view text);

/// One transmitted block. SM: antenna[j] (0-based) and label[j] per slot.
/// SSK: antenna only, label all zero. SMX: antenna unused, label holds N_T*B
/// labels in column-major order of X.
struct SignalBlock {
  std::vector<int> antenna;
  std::vector<int> label;

  bool operator==(const SignalBlock&) const = default;
};

class SignalCodec {
 public:
  SignalCodec(const SystemConfig& cfg, SignalMode mode = SignalMode::SM);

  const SystemConfig& config() const { return cfg_; }
  SignalMode mode() const { return mode_; }
  const Constellation& constellation() const { return constellation_; }

  int bits_per_block() const;
  SignalBlock map(const Bits& bits) const;
  Bits demap(const SignalBlock& block) const;

  /// N_T x B transmitted matrix X.
  CMatrix matrix(const SignalBlock& block) const;
  /// Symbol vector s (length B) of an SM/SSK block.
  CVector symbols(const SignalBlock& block) const;
  /// Inverse of matrix(); throws NotInConstellation.
  SignalBlock from_matrix(const CMatrix& x) const;

  /// Cardinality of the candidate set, saturating at INT64_MAX.
  std::int64_t candidate_count() const;
  /// Lexicographic order: antenna vector major, label vector minor.
  std::vector<SignalBlock> enumerate(std::int64_t cap = std::int64_t{1} << 20) const;
  /// Lexicographic rank of a block in enumerate() order.
  std::int64_t index_of(const SignalBlock& block) const;
  SignalBlock block_at(std::int64_t index) const;

  int hamming(const SignalBlock& a, const SignalBlock& b) const;

  /// Symbol used in SSK mode.
  cplx ssk_symbol() const;

 private:
  SystemConfig cfg_;
  SignalMode mode_;
  Constellation constellation_;
};

SignalBlock map_bits(const Bits& bits, const SystemConfig& cfg);
Bits demap_block(const std::vector<int>& antenna_idx, const CVector& symbols,
                 const SystemConfig& cfg);
int hamming_payload_distance(const CMatrix& x, const CMatrix& x_prime, const SystemConfig& cfg);
CMatrix pilot_block(const SystemConfig& cfg);
std::vector<SignalBlock> enumerate_candidates(const SystemConfig& cfg, SignalMode mode,
                                              std::int64_t cap = std::int64_t{1} << 20);
/// N_T x B zero-one matrix with a single one per column at the active antenna.
CMatrix ssk_matrix(const std::vector<int>& antenna, int n_tx);

}  // namespace smdet
