#pragma once

#include <cstdint>
#include <string_view>

namespace smdet {

enum class ModKind { PSK, QAM };

std::string_view to_string(ModKind kind);
ModKind parse_mod_kind(std::string_view text);

struct SystemConfig {
  int n_tx = 2;
  int n_rx = 2;
  int block_len = 2;   // B
  int frame_len = 5;   // N
  int mod_order = 2;   // M
  ModKind mod_kind = ModKind::PSK;
  double doppler = 0.01;  // f_D * T_s
  double symbol_power = 1.0;
  double pilot_power = 1.0;
  double noise_var = 0.1;

  /// Throws InvalidArgument / UnsupportedOrder on violated invariants.
  void validate() const;

  int antenna_bits() const;   // log2 N_T
  int symbol_bits() const;    // log2 M
  int bits_per_slot() const { return antenna_bits() + symbol_bits(); }
  int bits_per_block() const { return bits_per_slot() * block_len; }
};

bool is_power_of_two(std::int64_t v);
int ilog2(std::int64_t v);

/// sigma_z^2 = eps_s / (m * 10^(dB/10)) with m = log2(M N_T).
double noise_var_from_ebn0(const SystemConfig& cfg, double ebn0_db);

}  // namespace smdet
