#include "smdet/scenario.hpp"

#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "smdet/errors.hpp"

namespace smdet {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(StatsMode mode) {
  switch (mode) {
    case StatsMode::Genie: return "genie";
    case StatsMode::Estimated: return "estimated";
    case StatsMode::PhiTOnly: return "genie-phi-t-only";
    case StatsMode::PhiROnly: return "genie-phi-r-only";
  }
  return "genie";
}

StatsMode parse_stats_mode(std::string_view text) {
  for (StatsMode m : {StatsMode::Genie, StatsMode::Estimated, StatsMode::PhiTOnly,
                      StatsMode::PhiROnly})
    if (text == to_string(m)) return m;
  raise(ErrorCode::InvalidArgument, "unknown stats mode '" + std::string(text) + "'");
}

void Scenario::validate() const {
  cfg.validate();
  SignalCodec codec(cfg, mode);
  if (detectors.empty()) raise(ErrorCode::InvalidArgument, "scenario lists no detectors");
  if (snr_db.empty()) raise(ErrorCode::InvalidArgument, "SNR grid is empty");
  for (std::size_t i = 1; i < snr_db.size(); ++i)
    if (!(snr_db[i] > snr_db[i - 1]))
      raise(ErrorCode::InvalidArgument, "SNR grid must be strictly increasing");
  if (stop.min_errors <= 0 || stop.max_bits <= 0)
    raise(ErrorCode::InvalidArgument, "stop rules must be positive");
  if (estimator != EstimatorKind::Perfect && cfg.block_len != cfg.n_tx)
    raise(ErrorCode::InvalidArgument, "pilot blocks need block_len == n_tx");
  if (stats_mode == StatsMode::Estimated && estimator != EstimatorKind::MB)
    raise(ErrorCode::InvalidArgument, "estimated correlation needs the MB pilot window");
  if (stats_mode == StatsMode::Estimated && spatial.kind == SpatialKind::Explicit &&
      !spatial.kronecker)
    raise(ErrorCode::InvalidArgument, "estimated correlation assumes a Kronecker channel");
  for (DetectorKind d : detectors) {
    const auto est = detector_estimator(d);
    if (est && *est != EstimatorKind::Perfect && *est != estimator)
      raise(ErrorCode::InvalidArgument, std::string(to_string(d)) + " does not use the " +
                                            std::string(to_string(estimator)) + " estimator");
    if (is_two_stage(d) && (mode != SignalMode::SM || cfg.mod_kind != ModKind::PSK))
      raise(ErrorCode::InvalidArgument,
            std::string(to_string(d)) + " requires PSK spatial modulation");
  }
}

int Scenario::window_blocks() const {
  return estimator == EstimatorKind::MB ? 2 * cfg.frame_len + 1 : cfg.frame_len;
}

namespace {

struct Reader {
  std::string origin;

  [[noreturn]] void fail(const std::string& path, const std::string& what) const {
    raise(ErrorCode::ParseError, origin + ": field '" + path + "' " + what);
  }

  const json& require(const json& obj, const std::string& key, const std::string& path) const {
    const auto it = obj.find(key);
    if (it == obj.end()) raise(ErrorCode::ParseError, origin + ": missing required field '" + path + "'");
    return *it;
  }

  const json& object(const json& obj, const std::string& key, const std::string& path) const {
    const json& v = require(obj, key, path);
    if (!v.is_object()) fail(path, "must be an object");
    return v;
  }

  std::int64_t integer(const json& v, const std::string& path) const {
    if (!v.is_number_integer()) fail(path, "must be an integer");
    return v.get<std::int64_t>();
  }

  double number(const json& v, const std::string& path) const {
    if (!v.is_number()) fail(path, "must be a number");
    return v.get<double>();
  }

  std::string text(const json& v, const std::string& path) const {
    if (!v.is_string()) fail(path, "must be a string");
    return v.get<std::string>();
  }

  // Wraps library parse helpers so their errors carry the field path.
  template <typename F>
  auto convert(const std::string& path, F f) const {
    try {
      return f();
    } catch (const Error& e) {
      fail(path, std::string("is invalid: ") + e.what());
    }
  }

  CMatrix matrix(const json& v, const std::string& path) const {
    if (!v.is_array() || v.empty()) fail(path, "must be a non-empty array of rows");
    const Eigen::Index n = static_cast<Eigen::Index>(v.size());
    CMatrix out(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const json& row = v[i];
      if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n)
        fail(path, "must be a square matrix");
      for (Eigen::Index j = 0; j < n; ++j) {
        const json& e = row[j];
        const std::string p = path + "[" + std::to_string(i) + "][" + std::to_string(j) + "]";
        if (e.is_number())
          out(i, j) = cplx(e.get<double>(), 0.0);
        else if (e.is_array() && e.size() == 2)
          out(i, j) = cplx(number(e[0], p), number(e[1], p));
        else
          fail(p, "must be a number or [re, im]");
      }
    }
    return out;
  }
};

ordered_json matrix_json(const CMatrix& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (m(i, j).imag() == 0.0)
        row.push_back(m(i, j).real());
      else
        row.push_back(ordered_json::array({m(i, j).real(), m(i, j).imag()}));
    }
    rows.push_back(row);
  }
  return rows;
}

SpatialModel read_spatial(const Reader& rd, const json& doc) {
  const json& sp = rd.object(doc, "spatial", "spatial");
  const std::string kind = rd.text(rd.require(sp, "kind", "spatial.kind"), "spatial.kind");
  const json& params = rd.object(sp, "params", "spatial.params");
  if (kind == "exponential") {
    const double r = rd.number(rd.require(params, "r", "spatial.params.r"), "spatial.params.r");
    const double t = rd.number(rd.require(params, "t", "spatial.params.t"), "spatial.params.t");
    return SpatialModel::exponential(r, t);
  }
  if (kind == "bessel") {
    return SpatialModel::bessel(rd.number(rd.require(params, "spacing", "spatial.params.spacing"),
                                          "spatial.params.spacing"));
  }
  if (kind == "explicit") {
    if (params.contains("phi"))
      return SpatialModel::explicit_full(rd.matrix(params["phi"], "spatial.params.phi"));
    return SpatialModel::explicit_kronecker(
        rd.matrix(rd.require(params, "phi_t", "spatial.params.phi_t"), "spatial.params.phi_t"),
        rd.matrix(rd.require(params, "phi_r", "spatial.params.phi_r"), "spatial.params.phi_r"));
  }
  rd.fail("spatial.kind", "must be one of exponential, bessel, explicit");
}

json parse_json(std::string_view text, const std::string& origin) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    int line = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte, text.size());
    for (std::size_t i = 0; i + 1 < stop; ++i)
      if (text[i] == '\n') ++line;
    raise(ErrorCode::ParseError, origin + ":" + std::to_string(line) + ": " + e.what());
  }
}

std::vector<Scenario> read_family(const json& doc, const std::string& origin) {
  const Reader rd{origin};
  if (!doc.is_object()) raise(ErrorCode::ParseError, origin + ": scenario must be a JSON object");

  Scenario s;
  if (doc.contains("name")) s.name = rd.text(doc["name"], "name");
  auto int_field = [&](const char* key) {
    return static_cast<int>(rd.integer(rd.require(doc, key, key), key));
  };
  s.cfg.n_tx = int_field("n_tx");
  s.cfg.n_rx = int_field("n_rx");
  s.cfg.block_len = int_field("block_len");
  s.cfg.mod_order = int_field("mod_order");
  const std::string mod_kind = rd.text(rd.require(doc, "mod_kind", "mod_kind"), "mod_kind");
  s.cfg.mod_kind = rd.convert("mod_kind", [&] { return parse_mod_kind(mod_kind); });
  s.cfg.doppler = rd.number(rd.require(doc, "doppler", "doppler"), "doppler");
  if (doc.contains("symbol_power")) s.cfg.symbol_power = rd.number(doc["symbol_power"], "symbol_power");
  if (doc.contains("pilot_power")) s.cfg.pilot_power = rd.number(doc["pilot_power"], "pilot_power");
  if (doc.contains("signal_mode")) {
    const std::string m = rd.text(doc["signal_mode"], "signal_mode");
    s.mode = rd.convert("signal_mode", [&] { return parse_signal_mode(m); });
  }
  if (doc.contains("temporal")) {
    const std::string t = rd.text(doc["temporal"], "temporal");
    if (t == "jakes")
      s.temporal.kind = TemporalKind::Jakes;
    else if (t == "static")
      s.temporal.kind = TemporalKind::Static;
    else
      rd.fail("temporal", "must be jakes or static");
  }
  s.spatial = read_spatial(rd, doc);
  const std::string est = rd.text(rd.require(doc, "estimator", "estimator"), "estimator");
  s.estimator = rd.convert("estimator", [&] { return parse_estimator(est); });

  const json& dets = rd.require(doc, "detectors", "detectors");
  if (!dets.is_array()) rd.fail("detectors", "must be an array");
  for (std::size_t i = 0; i < dets.size(); ++i) {
    const std::string p = "detectors[" + std::to_string(i) + "]";
    const std::string d = rd.text(dets[i], p);
    s.detectors.push_back(rd.convert(p, [&] { return parse_detector(d); }));
  }
  const json& snr = rd.require(doc, "snr_db", "snr_db");
  if (!snr.is_array()) rd.fail("snr_db", "must be an array");
  for (std::size_t i = 0; i < snr.size(); ++i)
    s.snr_db.push_back(rd.number(snr[i], "snr_db[" + std::to_string(i) + "]"));

  const std::string sm = rd.text(rd.require(doc, "stats_mode", "stats_mode"), "stats_mode");
  s.stats_mode = rd.convert("stats_mode", [&] { return parse_stats_mode(sm); });
  const json& seed = rd.require(doc, "seed", "seed");
  if (!seed.is_number_unsigned()) rd.fail("seed", "must be a non-negative integer");
  s.seed = seed.get<std::uint64_t>();
  const json& stop = rd.object(doc, "stop", "stop");
  s.stop.min_errors = rd.integer(rd.require(stop, "min_errors", "stop.min_errors"), "stop.min_errors");
  s.stop.max_bits = rd.integer(rd.require(stop, "max_bits", "stop.max_bits"), "stop.max_bits");

  std::vector<int> frames;
  const json& fl = rd.require(doc, "frame_len", "frame_len");
  if (fl.is_array()) {
    if (fl.empty()) rd.fail("frame_len", "must not be empty");
    for (std::size_t i = 0; i < fl.size(); ++i)
      frames.push_back(static_cast<int>(rd.integer(fl[i], "frame_len[" + std::to_string(i) + "]")));
  } else {
    frames.push_back(static_cast<int>(rd.integer(fl, "frame_len")));
  }

  std::vector<Scenario> out;
  for (int n : frames) {
    Scenario member = s;
    member.cfg.frame_len = n;
    try {
      member.validate();
    } catch (const Error& e) {
      raise(ErrorCode::ParseError, origin + ": invalid scenario: " + e.what());
    }
    out.push_back(std::move(member));
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::IoError, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::vector<Scenario> parse_scenario_family(std::string_view json_text, std::string_view origin) {
  const std::string o(origin);
  return read_family(parse_json(json_text, o), o);
}

Scenario parse_scenario(std::string_view json_text, std::string_view origin) {
  std::vector<Scenario> family = parse_scenario_family(json_text, origin);
  if (family.size() != 1)
    raise(ErrorCode::ParseError, std::string(origin) +
                                     ": field 'frame_len' lists several frame lengths; load it as a family");
  return std::move(family.front());
}

std::vector<Scenario> load_scenario_family(const std::string& path) {
  return parse_scenario_family(read_file(path), path);
}

Scenario load_scenario(const std::string& path) { return parse_scenario(read_file(path), path); }

std::string merge_scenario_json(std::string_view base, std::string_view override_doc) {
  json b = parse_json(base, "<preset>");
  b.merge_patch(parse_json(override_doc, "<override>"));
  return b.dump(2);
}

std::string scenario_to_json(const Scenario& s) {
  ordered_json j;
  if (!s.name.empty()) j["name"] = s.name;
  j["n_tx"] = s.cfg.n_tx;
  j["n_rx"] = s.cfg.n_rx;
  j["block_len"] = s.cfg.block_len;
  j["frame_len"] = s.cfg.frame_len;
  j["mod_kind"] = std::string(to_string(s.cfg.mod_kind));
  j["mod_order"] = s.cfg.mod_order;
  j["doppler"] = s.cfg.doppler;
  j["symbol_power"] = s.cfg.symbol_power;
  j["pilot_power"] = s.cfg.pilot_power;
  j["signal_mode"] = std::string(to_string(s.mode));
  j["temporal"] = s.temporal.kind == TemporalKind::Jakes ? "jakes" : "static";
  ordered_json sp;
  ordered_json params = ordered_json::object();
  switch (s.spatial.kind) {
    case SpatialKind::Exponential:
      sp["kind"] = "exponential";
      params["r"] = s.spatial.r;
      params["t"] = s.spatial.t;
      break;
    case SpatialKind::Bessel:
      sp["kind"] = "bessel";
      params["spacing"] = s.spatial.spacing;
      break;
    case SpatialKind::Explicit:
      sp["kind"] = "explicit";
      if (s.spatial.kronecker) {
        params["phi_t"] = matrix_json(s.spatial.phi_t);
        params["phi_r"] = matrix_json(s.spatial.phi_r);
      } else {
        params["phi"] = matrix_json(s.spatial.phi);
      }
      break;
  }
  sp["params"] = params;
  j["spatial"] = sp;
  j["estimator"] = std::string(to_string(s.estimator));
  ordered_json dets = ordered_json::array();
  for (DetectorKind d : s.detectors) dets.push_back(std::string(to_string(d)));
  j["detectors"] = dets;
  j["snr_db"] = s.snr_db;
  j["stats_mode"] = std::string(to_string(s.stats_mode));
  j["seed"] = s.seed;
  j["stop"] = {{"min_errors", s.stop.min_errors}, {"max_bits", s.stop.max_bits}};
  return j.dump(2) + "\n";
}

}  // namespace smdet
