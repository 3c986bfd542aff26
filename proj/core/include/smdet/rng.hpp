#pragma once

#include <cstdint>
#include <random>

#include "smdet/types.hpp"

namespace smdet {

std::uint64_t splitmix64(std::uint64_t x);

/// Mixes a root seed with up to three counters into an independent substream seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                          std::uint64_t c = 0);

class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  int bit() { return static_cast<int>(engine_() >> 63); }

  /// CN(0, var): real and imaginary parts each N(0, var/2).
  cplx complex_normal(double var = 1.0);
  CMatrix complex_normal(Eigen::Index rows, Eigen::Index cols, double var = 1.0);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace smdet
