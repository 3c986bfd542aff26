#include "smdet/results.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "smdet/errors.hpp"

namespace smdet {

Interval wilson_interval(std::int64_t errors, std::int64_t trials, double z) {
  if (trials <= 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(errors) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  // exact endpoints at 0 and n errors; the formula leaves rounding residue there
  return {errors == 0 ? 0.0 : std::max(0.0, centre - half),
          errors == trials ? 1.0 : std::min(1.0, centre + half)};
}

namespace {

std::string number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void append_row(std::string& out, const std::string& det, const std::string& est, double snr,
                int k, const ErrorCount& c) {
  const double ber = c.bits > 0 ? static_cast<double>(c.errors) / c.bits : 0.0;
  const Interval ci = wilson_interval(c.errors, c.bits);
  out += det + "," + est + "," + number(snr) + "," + std::to_string(k) + "," +
         std::to_string(c.bits) + "," + std::to_string(c.errors) + "," + number(ber) + "," +
         number(ci.low) + "," + number(ci.high) + "\n";
}

}  // namespace

std::string format_results(const BerCurve& curve) {
  std::string out = "detector,estimator,snr_db,block_k,bits,bit_errors,ber,ci_low,ci_high\n";
  for (const CurvePoint& p : curve.points) {
    const std::string det(to_string(p.detector));
    const std::string est(to_string(p.detector == DetectorKind::PerfectCSI
                                        ? EstimatorKind::Perfect
                                        : curve.scenario.estimator));
    append_row(out, det, est, p.snr_db, -1, p.total);
    for (const auto& [k, c] : p.per_k) append_row(out, det, est, p.snr_db, k, c);
  }
  return out;
}

void write_text_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) raise(ErrorCode::IoError, "cannot open '" + tmp.string() + "' for writing");
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    f.flush();
    if (!f) raise(ErrorCode::IoError, "write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    raise(ErrorCode::IoError, "cannot move results into '" + path + "'");
  }
}

void write_results(const BerCurve& curve, const std::string& path) {
  write_text_atomic(path, format_results(curve));
}

}  // namespace smdet
