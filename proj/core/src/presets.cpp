#include "smdet/presets.hpp"

#include <string>

#include "json.hpp"
#include "smdet/errors.hpp"

namespace smdet {

namespace {

using nlohmann::ordered_json;

ordered_json base(int n_tx, int n_rx, int block_len, ordered_json frame_len, const char* mod_kind,
                  int mod_order, const char* estimator) {
  ordered_json j;
  j["n_tx"] = n_tx;
  j["n_rx"] = n_rx;
  j["block_len"] = block_len;
  j["frame_len"] = std::move(frame_len);
  j["mod_kind"] = mod_kind;
  j["mod_order"] = mod_order;
  j["doppler"] = 0.01;
  j["signal_mode"] = "SM";
  j["temporal"] = "jakes";
  j["estimator"] = estimator;
  j["snr_db"] = {0, 5, 10, 15, 20, 25, 30};
  j["stats_mode"] = "genie";
  j["seed"] = 20240611;
  j["stop"] = {{"min_errors", 200}, {"max_bits", 20000000}};
  return j;
}

ordered_json exponential(double r) {
  return {{"kind", "exponential"}, {"params", {{"r", r}, {"t", r}}}};
}

ordered_json bessel(double spacing) {
  return {{"kind", "bessel"}, {"params", {{"spacing", spacing}}}};
}

Preset make(const char* name, const char* description, ordered_json j) {
  j["name"] = name;
  return Preset{name, description, j.dump(2)};
}

std::vector<Preset> build() {
  std::vector<Preset> out;
  const ordered_json mb_sm_dets = {"perfect-csi", "mismatched", "ceea-ml-mb", "two-stage-mb",
                                   "zrc-mb",      "ztc-mb",     "two-stage-zrc-mb"};
  auto mb_4x4 = [&](const char* name, const char* desc, ordered_json spatial) {
    ordered_json j = base(4, 4, 4, {5, 10}, "PSK", 4, "MB");
    j["spatial"] = std::move(spatial);
    j["detectors"] = mb_sm_dets;
    j["snr_db"] = {0, 2.5, 5, 7.5, 10, 12.5, 15, 17.5, 20};
    out.push_back(make(name, desc, std::move(j)));
  };
  mb_4x4("fig-MB-bessel-d05", "MB SM, 4x4, QPSK, B=4, Bessel spacing 0.5 wavelength", bessel(0.5));
  mb_4x4("fig-MB-bessel-d1", "MB SM, 4x4, QPSK, B=4, Bessel spacing 1 wavelength", bessel(1.0));
  mb_4x4("fig-MB-exp-r08", "MB SM, 4x4, QPSK, B=4, exponential r=t=0.8", exponential(0.8));
  mb_4x4("fig-MB-exp-r05", "MB SM, 4x4, QPSK, B=4, exponential r=t=0.5", exponential(0.5));

  auto corr_est = [&](const char* name, const char* desc, ordered_json spatial,
                      ordered_json frames) {
    ordered_json j = base(4, 4, 4, std::move(frames), "PSK", 4, "MB");
    j["spatial"] = std::move(spatial);
    j["detectors"] = {"mismatched", "zrc-mb", "ztc-mb"};
    j["snr_db"] = {0, 2.5, 5, 7.5, 10, 12.5, 15, 17.5, 20};
    j["stats_mode"] = "estimated";
    out.push_back(make(name, desc, std::move(j)));
  };
  corr_est("fig-MB-corrEst-r08", "estimated correlation, exponential r=t=0.8", exponential(0.8),
           {5, 10});
  corr_est("fig-MB-corrEst-r05", "estimated correlation, exponential r=t=0.5", exponential(0.5),
           {5, 10});
  corr_est("fig-MB-corrEst-bessel-d05", "estimated exponential fit on a Bessel channel, 0.5 wavelength",
           bessel(0.5), {5});
  corr_est("fig-MB-corrEst-bessel-d1", "estimated exponential fit on a Bessel channel, 1 wavelength",
           bessel(1.0), {5});

  auto qam16 = [&](const char* name, const char* desc, double r, const char* est,
                   ordered_json dets) {
    ordered_json j = base(2, 4, 2, {10, 20}, "QAM", 16, est);
    j["spatial"] = exponential(r);
    j["detectors"] = std::move(dets);
    out.push_back(make(name, desc, std::move(j)));
  };
  const ordered_json mb_qam_dets = {"perfect-csi", "mismatched", "ceea-ml-mb", "zrc-mb", "ztc-mb"};
  const ordered_json dd_dets = {"perfect-csi", "mismatched", "ceea-ml-dd", "zrc-dd", "ztc-dd"};
  qam16("fig-MB-16QAM-r08", "MB SM, 16-QAM, NT=B=2, NR=4, r=t=0.8", 0.8, "MB", mb_qam_dets);
  qam16("fig-MB-16QAM-r05", "MB SM, 16-QAM, NT=B=2, NR=4, r=t=0.5", 0.5, "MB", mb_qam_dets);
  qam16("fig-DD-16QAM-r08", "DD SM, 16-QAM, NT=B=2, NR=4, r=t=0.8", 0.8, "DD", dd_dets);
  qam16("fig-DD-16QAM-r05", "DD SM, 16-QAM, NT=B=2, NR=4, r=t=0.5", 0.5, "DD", dd_dets);

  for (double r : {0.8, 0.5}) {
    ordered_json j = base(2, 4, 2, 10, "QAM", 4, "DD");
    j["spatial"] = exponential(r);
    j["detectors"] = dd_dets;
    out.push_back(make(r == 0.8 ? "fig-DD-4QAM-r08" : "fig-DD-4QAM-r05",
                       r == 0.8 ? "DD SM, 4-QAM, NT=B=2, NR=4, N=10, r=t=0.8"
                                : "DD SM, 4-QAM, NT=B=2, NR=4, N=10, r=t=0.5",
                       std::move(j)));
  }
  for (double r : {0.8, 0.5}) {
    ordered_json j = base(2, 2, 2, {10, 20}, "PSK", 4, "MB");
    j["signal_mode"] = "SMX";
    j["spatial"] = exponential(r);
    j["detectors"] = mb_qam_dets;
    out.push_back(make(r == 0.8 ? "fig-SMX-MB-r08" : "fig-SMX-MB-r05",
                       r == 0.8 ? "MB SMX, 2x2, QPSK, B=2, r=t=0.8" : "MB SMX, 2x2, QPSK, B=2, r=t=0.5",
                       std::move(j)));
  }
  return out;
}

}  // namespace

const std::vector<Preset>& presets() {
  static const std::vector<Preset> all = build();
  return all;
}

const Preset& find_preset(std::string_view name) {
  for (const Preset& p : presets())
    if (p.name == name) return p;
  raise(ErrorCode::InvalidArgument, "unknown preset '" + std::string(name) + "'");
}

std::vector<Scenario> preset_family(std::string_view name, std::string_view override_doc) {
  const Preset& p = find_preset(name);
  return parse_scenario_family(merge_scenario_json(p.json, override_doc), "preset " + p.name);
}

}  // namespace smdet
