#pragma once

#include <cstdint>
#include <string>

#include "smdet/simulate.hpp"

namespace smdet {

struct Interval {
  double low = 0.0;
  double high = 1.0;
};

/// Wilson score interval for a binomial proportion (95% by default).
Interval wilson_interval(std::int64_t errors, std::int64_t trials, double z = 1.959963984540054);

/// CSV with header detector,estimator,snr_db,block_k,bits,bit_errors,ber,ci_low,ci_high.
/// Per (detector, SNR) the aggregate row (block_k = -1) comes first, then one
/// row per data block.
std::string format_results(const BerCurve& curve);

/// Writes to a temporary file next to path and renames it into place.
void write_text_atomic(const std::string& path, const std::string& content);
void write_results(const BerCurve& curve, const std::string& path);

}  // namespace smdet
