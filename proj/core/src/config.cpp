#include "smdet/config.hpp"

#include <cmath>
#include <string>

#include "smdet/errors.hpp"

namespace smdet {

std::string_view to_string(ModKind kind) { return kind == ModKind::PSK ? "PSK" : "QAM"; }

ModKind parse_mod_kind(std::string_view text) {
  if (text == "PSK" || text == "psk") return ModKind::PSK;
  if (text == "QAM" || text == "qam") return ModKind::QAM;
  raise(ErrorCode::InvalidArgument, "unknown modulation kind '" + std::string(text) + "'");
}

bool is_power_of_two(std::int64_t v) { return v > 0 && (v & (v - 1)) == 0; }

int ilog2(std::int64_t v) {
  int r = 0;
  while (v > 1) {
    v >>= 1;
    ++r;
  }
  return r;
}

void SystemConfig::validate() const {
  if (n_tx < 1 || n_rx < 1 || block_len < 1)
    raise(ErrorCode::InvalidArgument, "antenna counts and block length must be positive");
  if (!is_power_of_two(n_tx))
    raise(ErrorCode::InvalidArgument, "n_tx must be a power of two");
  if (frame_len < 2) raise(ErrorCode::InvalidArgument, "frame_len must be >= 2");
  if (!is_power_of_two(mod_order) || mod_order < 2)
    raise(ErrorCode::UnsupportedOrder, "mod_order must be a power of two >= 2");
  if (!(symbol_power > 0) || !(pilot_power > 0) || !(noise_var > 0))
    raise(ErrorCode::InvalidArgument, "powers and noise variance must be positive");
  if (!(doppler >= 0)) raise(ErrorCode::InvalidArgument, "doppler must be non-negative");
}

int SystemConfig::antenna_bits() const { return ilog2(n_tx); }
int SystemConfig::symbol_bits() const { return ilog2(mod_order); }

double noise_var_from_ebn0(const SystemConfig& cfg, double ebn0_db) {
  const double m = static_cast<double>(cfg.bits_per_slot());
  return cfg.symbol_power / (m * std::pow(10.0, ebn0_db / 10.0));
}

}  // namespace smdet
