#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "smdet/config.hpp"
#include "smdet/corrmodel.hpp"
#include "smdet/detectors.hpp"
#include "smdet/smcodec.hpp"
#include "smdet/statistics.hpp"

namespace smdet {

/// What the receiver knows about the spatial correlation.
///   Genie:     the true Phi.
///   Estimated: Phi_T (x) Phi_R fitted per window from the three MB pilot estimates.
///   PhiTOnly:  the true Phi_T with the receive side assumed white.
///   PhiROnly:  the true Phi_R with the transmit side assumed white.
enum class StatsMode { Genie, Estimated, PhiTOnly, PhiROnly };

std::string_view to_string(StatsMode mode);
StatsMode parse_stats_mode(std::string_view text);

struct StopRule {
  std::int64_t min_errors = 200;
  std::int64_t max_bits = 20'000'000;
};

struct Scenario {
  std::string name;
  SystemConfig cfg;  // noise_var is overwritten per SNR point
  SignalMode mode = SignalMode::SM;
  SpatialModel spatial;
  TemporalModel temporal;
  EstimatorKind estimator = EstimatorKind::MB;
  std::vector<DetectorKind> detectors;
  std::vector<double> snr_db;
  StatsMode stats_mode = StatsMode::Genie;
  StopRule stop;
  std::uint64_t seed = 1;

  /// Throws InvalidArgument for inconsistent settings.
  void validate() const;
  /// Blocks in one trial window: 2N + 1 for MB, N otherwise.
  int window_blocks() const;
};

/// Parses one JSON scenario document. frame_len may be an array, which yields
/// one scenario per entry. Errors are ParseError naming the line or field.
std::vector<Scenario> parse_scenario_family(std::string_view json_text,
                                            std::string_view origin = "<string>");
/// Single-scenario form; a frame_len array with more than one entry is a ParseError.
Scenario parse_scenario(std::string_view json_text, std::string_view origin = "<string>");

std::vector<Scenario> load_scenario_family(const std::string& path);
Scenario load_scenario(const std::string& path);

/// Applies an RFC 7396 merge patch (override) on top of base; both are JSON text.
std::string merge_scenario_json(std::string_view base, std::string_view override_doc);

/// Canonical JSON with a fixed key order; parse_scenario(to_json(s)) restores s.
std::string scenario_to_json(const Scenario& s);

}  // namespace smdet
