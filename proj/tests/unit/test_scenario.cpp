#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "smdet/presets.hpp"
#include "smdet/results.hpp"
#include "smdet/scenario.hpp"
#include "test_util.hpp"

using namespace smdet;
using testutil::code_of;

namespace {

const char* kDoc = R"({
  "name": "unit",
  "n_tx": 2, "n_rx": 3, "block_len": 2, "frame_len": 4,
  "mod_kind": "QAM", "mod_order": 16, "doppler": 0.02,
  "spatial": {"kind": "exponential", "params": {"r": 0.4, "t": 0.6}},
  "estimator": "MB",
  "detectors": ["perfect-csi", "ceea-ml-mb", "zrc-mb"],
  "snr_db": [0, 5, 10],
  "stats_mode": "genie",
  "seed": 7,
  "stop": {"min_errors": 50, "max_bits": 1000000}
})";

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

std::string without(const std::string& key) {
  nlohmann::json j = nlohmann::json::parse(kDoc);
  j.erase(key);
  return j.dump();
}

}  // namespace

TEST(ScenarioParse, ReadsEveryField) {
  const Scenario s = parse_scenario(kDoc);
  EXPECT_EQ(s.name, "unit");
  EXPECT_EQ(s.cfg.n_tx, 2);
  EXPECT_EQ(s.cfg.n_rx, 3);
  EXPECT_EQ(s.cfg.frame_len, 4);
  EXPECT_EQ(s.cfg.mod_kind, ModKind::QAM);
  EXPECT_EQ(s.cfg.mod_order, 16);
  EXPECT_DOUBLE_EQ(s.cfg.doppler, 0.02);
  EXPECT_EQ(s.spatial.kind, SpatialKind::Exponential);
  EXPECT_DOUBLE_EQ(s.spatial.r, 0.4);
  EXPECT_DOUBLE_EQ(s.spatial.t, 0.6);
  EXPECT_EQ(s.estimator, EstimatorKind::MB);
  EXPECT_EQ(s.detectors.size(), 3u);
  EXPECT_EQ(s.snr_db, (std::vector<double>{0, 5, 10}));
  EXPECT_EQ(s.stats_mode, StatsMode::Genie);
  EXPECT_EQ(s.seed, 7u);
  EXPECT_EQ(s.stop.min_errors, 50);
  EXPECT_EQ(s.window_blocks(), 9);
}

TEST(ScenarioParse, MissingFieldsAreNamed) {
  for (const char* key : {"stats_mode", "seed", "stop", "n_tx", "detectors", "frame_len"}) {
    const std::string doc = without(key);
    EXPECT_EQ(code_of([&] { parse_scenario(doc); }), ErrorCode::ParseError) << key;
    EXPECT_NE(message_of([&] { parse_scenario(doc); }).find(std::string("missing required field '") + key + "'"),
              std::string::npos)
        << key;
  }
}

TEST(ScenarioParse, SyntaxErrorReportsLine) {
  const std::string bad = "{\n  \"n_tx\": 2,\n  \"n_rx\": ,\n}";
  const std::string msg = message_of([&] { parse_scenario(bad, "bad.json"); });
  EXPECT_NE(msg.find("bad.json:3"), std::string::npos) << msg;
}

TEST(ScenarioParse, InvalidValues) {
  nlohmann::json j = nlohmann::json::parse(kDoc);
  j["stats_mode"] = "oracle";
  EXPECT_NE(message_of([&] { parse_scenario(j.dump()); }).find("stats_mode"), std::string::npos);
  j = nlohmann::json::parse(kDoc);
  j["detectors"] = {"ceea-ml-dd"};
  EXPECT_EQ(code_of([&] { parse_scenario(j.dump()); }), ErrorCode::ParseError);
  j = nlohmann::json::parse(kDoc);
  j["detectors"] = {"two-stage-mb"};  // QAM
  EXPECT_EQ(code_of([&] { parse_scenario(j.dump()); }), ErrorCode::ParseError);
  j = nlohmann::json::parse(kDoc);
  j["snr_db"] = {5, 0};
  EXPECT_EQ(code_of([&] { parse_scenario(j.dump()); }), ErrorCode::ParseError);
  j = nlohmann::json::parse(kDoc);
  j["block_len"] = 3;
  EXPECT_EQ(code_of([&] { parse_scenario(j.dump()); }), ErrorCode::ParseError);
  j = nlohmann::json::parse(kDoc);
  j["seed"] = -1;
  EXPECT_NE(message_of([&] { parse_scenario(j.dump()); }).find("'seed'"), std::string::npos);
}

TEST(ScenarioParse, FrameFamily) {
  nlohmann::json j = nlohmann::json::parse(kDoc);
  j["frame_len"] = {5, 10, 20};
  const auto fam = parse_scenario_family(j.dump());
  ASSERT_EQ(fam.size(), 3u);
  EXPECT_EQ(fam[2].cfg.frame_len, 20);
  EXPECT_EQ(fam[1].window_blocks(), 21);
  EXPECT_EQ(code_of([&] { parse_scenario(j.dump()); }), ErrorCode::ParseError);
}

TEST(ScenarioParse, RoundTrip) {
  const Scenario s = parse_scenario(kDoc);
  const std::string text = scenario_to_json(s);
  const Scenario t = parse_scenario(text);
  EXPECT_EQ(scenario_to_json(t), text);
  EXPECT_EQ(t.detectors, s.detectors);

  nlohmann::json j = nlohmann::json::parse(kDoc);
  j["spatial"] = {{"kind", "explicit"},
                  {"params", {{"phi_t", {{1.0, {0.3, 0.1}}, {{0.3, -0.1}, 1.0}}}, {"phi_r", {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}}}};
  const Scenario e = parse_scenario(j.dump());
  EXPECT_EQ(e.spatial.kind, SpatialKind::Explicit);
  EXPECT_EQ(scenario_to_json(parse_scenario(scenario_to_json(e))), scenario_to_json(e));
}

TEST(Presets, ExponentialMbPreset) {
  const auto fam = preset_family("fig-MB-exp-r08");
  ASSERT_EQ(fam.size(), 2u);
  const Scenario& s = fam[0];
  EXPECT_EQ(s.cfg.n_tx, 4);
  EXPECT_EQ(s.cfg.n_rx, 4);
  EXPECT_EQ(s.cfg.block_len, 4);
  EXPECT_EQ(s.cfg.mod_order, 4);
  EXPECT_EQ(s.cfg.mod_kind, ModKind::PSK);
  EXPECT_DOUBLE_EQ(s.cfg.doppler, 0.01);
  EXPECT_DOUBLE_EQ(s.spatial.r, 0.8);
  EXPECT_DOUBLE_EQ(s.spatial.t, 0.8);
  EXPECT_EQ(fam[0].cfg.frame_len, 5);
  EXPECT_EQ(fam[1].cfg.frame_len, 10);
}

TEST(Presets, AllParseAndOverride) {
  for (const Preset& p : presets()) EXPECT_FALSE(preset_family(p.name).empty()) << p.name;
  const auto fam = preset_family("fig-MB-exp-r08", R"({"frame_len": 7, "seed": 3})");
  ASSERT_EQ(fam.size(), 1u);
  EXPECT_EQ(fam[0].cfg.frame_len, 7);
  EXPECT_EQ(fam[0].seed, 3u);
  EXPECT_EQ(code_of([] { find_preset("nope"); }), ErrorCode::InvalidArgument);
}

TEST(Results, WilsonInterval) {
  // independent closed form for 0 of n: [0, z^2/(n+z^2)]
  const double z = 1.959963984540054;
  const Interval zero = wilson_interval(0, 100);
  EXPECT_EQ(zero.low, 0.0);
  EXPECT_NEAR(zero.high, z * z / (100 + z * z), 1e-12);
  const Interval half = wilson_interval(50, 100);
  EXPECT_NEAR(0.5 * (half.low + half.high), 0.5, 1e-12);
  EXPECT_NEAR(half.high - 0.5, 0.0961, 2e-4);
  const Interval none = wilson_interval(0, 0);
  EXPECT_EQ(none.low, 0.0);
  EXPECT_EQ(none.high, 1.0);
}

TEST(Results, CsvLayout) {
  BerCurve c;
  c.scenario = parse_scenario(kDoc);
  CurvePoint p;
  p.detector = DetectorKind::PerfectCSI;
  p.snr_db = 2.5;
  p.total = {200, 4};
  p.per_k[1] = {100, 3};
  p.per_k[2] = {100, 1};
  c.points.push_back(p);
  p.detector = DetectorKind::CeeaMlMb;
  c.points.push_back(p);
  const std::string csv = format_results(c);
  std::istringstream in(csv);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  ASSERT_EQ(lines.size(), 7u);
  EXPECT_EQ(lines[0], "detector,estimator,snr_db,block_k,bits,bit_errors,ber,ci_low,ci_high");
  EXPECT_EQ(lines[1].rfind("perfect-csi,Perfect,2.5,-1,200,4,0.02,", 0), 0u) << lines[1];
  EXPECT_EQ(lines[2].rfind("perfect-csi,Perfect,2.5,1,100,3,0.03,", 0), 0u) << lines[2];
  EXPECT_EQ(lines[4].rfind("ceea-ml-mb,MB,2.5,-1,", 0), 0u) << lines[4];
}

TEST(Results, AtomicWrite) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "smdet_results_test";
  fs::create_directories(dir);
  const fs::path target = dir / "out.csv";
  write_text_atomic(target.string(), "a\n");
  write_text_atomic(target.string(), "b\n");
  std::ifstream f(target);
  std::string s;
  std::getline(f, s);
  EXPECT_EQ(s, "b");
  EXPECT_FALSE(fs::exists(dir / "out.csv.tmp"));
  EXPECT_EQ(code_of([&] { write_text_atomic((dir / "missing" / "x.csv").string(), "x"); }), ErrorCode::IoError);
  fs::remove_all(dir);
}
