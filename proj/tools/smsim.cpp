// smsim: command-line front end for scenario simulation and union bounds.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "smdet/analysis.hpp"
#include "smdet/errors.hpp"
#include "smdet/presets.hpp"
#include "smdet/results.hpp"
#include "smdet/scenario.hpp"
#include "smdet/simulate.hpp"

namespace {

constexpr int kUsage = 1;
constexpr int kRuntime = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) smdet::raise(smdet::ErrorCode::IoError, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<smdet::Scenario> load_family(const std::string& file, const std::string& preset) {
  if (!preset.empty()) return smdet::preset_family(preset, file.empty() ? "{}" : read_file(file));
  if (file.empty()) throw UsageError("a scenario file or --preset is required");
  return smdet::load_scenario_family(file);
}

// One output path per family member: out itself for a single scenario,
// <stem>.N<frame>.csv otherwise.
std::string member_path(const std::string& out, const smdet::Scenario& s, std::size_t family_size) {
  if (family_size == 1) return out;
  const std::filesystem::path p(out);
  std::filesystem::path r = p.parent_path() / p.stem();
  r += ".N" + std::to_string(s.cfg.frame_len) + (p.has_extension() ? p.extension().string() : ".csv");
  return r.string();
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty())
    std::cout << text;
  else
    smdet::write_text_atomic(out, text);
}

int run_simulate(const std::string& file, const std::string& preset, const std::string& out,
                 int workers) {
  const std::vector<smdet::Scenario> family = load_family(file, preset);
  if (family.size() > 1 && out.empty())
    throw UsageError("--out is required when the scenario lists several frame lengths");
  for (const smdet::Scenario& s : family) {
    std::cerr << "scenario " << (s.name.empty() ? file : s.name) << ", N=" << s.cfg.frame_len
              << "\n";
    smdet::SweepOptions opts;
    opts.workers = workers;
    opts.progress = [](const std::string& msg) { std::cerr << "  " << msg << "\n"; };
    const smdet::BerCurve curve = smdet::run_sweep(s, opts);
    for (const smdet::CurvePoint& p : curve.points)
      if (p.budget_exceeded)
        std::cerr << "  budget exceeded: " << smdet::to_string(p.detector) << " at " << p.snr_db
                  << " dB (" << p.total.errors << " errors)\n";
    emit(out.empty() ? out : member_path(out, s, family.size()), smdet::format_results(curve));
  }
  return 0;
}

int run_bound(const std::string& file, const std::string& preset, const std::string& out,
              int n_mc) {
  const std::vector<smdet::Scenario> family = load_family(file, preset);
  if (family.size() > 1 && out.empty())
    throw UsageError("--out is required when the scenario lists several frame lengths");
  for (const smdet::Scenario& s : family) {
    std::string csv = "snr_db,block_k,bound\n";
    smdet::UnionBoundOptions opts;
    opts.n_mc = n_mc;
    for (std::size_t i = 0; i < s.snr_db.size(); ++i) {
      smdet::SystemConfig cfg = s.cfg;
      cfg.noise_var = smdet::noise_var_for(cfg, s.mode, s.snr_db[i]);
      smdet::RngStream rng(smdet::derive_seed(s.seed, i, 0, 0xB0));
      const smdet::BerBound b =
          smdet::ber_bound_curve(s.estimator, cfg, s.mode, smdet::spatial_correlation(s.spatial, cfg),
                                 smdet::make_rho(s.temporal, cfg), rng, opts);
      char buf[96];
      std::snprintf(buf, sizeof buf, "%.10g,-1,%.10g\n", s.snr_db[i], b.average);
      csv += buf;
      for (const auto& [k, v] : b.per_k) {
        std::snprintf(buf, sizeof buf, "%.10g,%d,%.10g\n", s.snr_db[i], k, v.value);
        csv += buf;
      }
      std::cerr << "bound at " << s.snr_db[i] << " dB: " << b.average << "\n";
    }
    emit(out.empty() ? out : member_path(out, s, family.size()), csv);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatial-modulation detection simulator"};
  app.require_subcommand(1);

  std::string file;
  std::string preset;
  std::string out;
  int workers = 1;
  int n_mc = 2000;

  CLI::App* sim = app.add_subcommand("simulate", "Monte Carlo BER sweep for a scenario");
  sim->add_option("scenario", file, "Scenario JSON (overrides the preset when both are given)");
  sim->add_option("--out", out, "Result CSV path (stdout when omitted)");
  sim->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
  sim->add_option("--preset", preset, "Start from a named preset");

  CLI::App* bound = app.add_subcommand("bound", "Union bound on BER per block index");
  bound->add_option("scenario", file, "Scenario JSON");
  bound->add_option("--pairwise-mc", n_mc, "Channel-estimate draws per pair")
      ->required()
      ->check(CLI::PositiveNumber);
  bound->add_option("--out", out, "Result CSV path (stdout when omitted)");
  bound->add_option("--preset", preset, "Start from a named preset");

  CLI::App* list = app.add_subcommand("list-presets", "Print the built-in presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsage;
  }

  try {
    if (*list) {
      for (const smdet::Preset& p : smdet::presets()) std::cout << p.name << "  " << p.description << "\n";
      return 0;
    }
    if (*sim) return run_simulate(file, preset, out, workers);
    if (*bound) return run_bound(file, preset, out, n_mc);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const smdet::Error& e) {
    std::cerr << "error [" << smdet::to_string(e.code()) << "]: " << e.what() << "\n";
    return kRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kUsage;
}
