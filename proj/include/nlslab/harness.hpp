#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nlslab/asymptotics.hpp"
#include "nlslab/dynamics.hpp"
#include "nlslab/function_spaces.hpp"
#include "nlslab/ground_state.hpp"

namespace nlslab {

enum class Scenario {
  Linear,
  SmallData,
  Defocusing,
  Soliton,
  SolitonPlusRadiation,
  PerturbedGroundState,
  BlowupProbe,
  Custom,
};
std::string scenario_name(Scenario s);
Scenario parse_scenario(const std::string& name);

// Config grammar: one `key = value` per line, `#` starts a comment, keys are
// dotted (equation.p, grid.n, ...), lists are comma separated and
// concentration pairs are written R:R'. `scenario` selects the defaults that
// the other keys then override, wherever it appears in the file.
struct ScenarioConfig {
  Scenario scenario = Scenario::Custom;
  std::uint64_t seed = 0;

  int dim = 5;
  double p = 2.0;
  int sign = -1;

  double rmax = 40.0;
  std::size_t n = 1024;

  double dt = 1e-3;
  bool dt_auto = false;  // use the stability cap of the initial data
  double t_end = 10.0;
  std::size_t sample_every = 100;
  int order = 2;
  std::size_t monitor_every = 0;
  bool track_duhamel = true;

  // Gaussian packet amplitude exp(-((r - center)/width)^2) exp(i phase r);
  // for perturbed_ground_state, amplitude is the perturbation size.
  double amplitude = 1.0;
  double width = 1.0;
  double center = 0.0;
  double phase = 0.0;
  double omega = 1.0 / 3.0;
  double radiation_amplitude = 0.01;
  double radiation_center = 9.0;
  double radiation_width = 2.0;
  double radiation_phase = 2.0;

  std::vector<double> radii{2.0, 5.0, 10.0, 15.0, 20.0};
  std::vector<int> bands{-4, -3, -2, -1, 0, 1, 2, 3, 4};
  std::size_t probe_count = 32;
  double probe_width = 1.0;
  std::vector<std::pair<double, double>> concentration{{2.0, 10.0}};
  double concentration_threshold = 0.1;
  LocalizationKnobs knobs;
  bool asymptotics = true;  // radiation, localization, concentration, petite
  bool norms = true;

  static ScenarioConfig defaults(Scenario s);
  NlsParams params() const;
  bool uses_ground_state() const;
  // Canonical key=value text; parse_config(canonical()) reproduces the config.
  std::string canonical() const;
  // FNV-1a 64 of canonical(), hex.
  std::string hash() const;
  // Throws config-invalid with a message that starts with the offending key.
  void validate() const;
};

ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);

// Initial data of the scenario; fills gs for the soliton-bearing ones.
RadialField initial_data(const ScenarioConfig& cfg, const RadialGrid& grid, std::optional<GroundState>* gs = nullptr);

struct RunRecord {
  std::string config_hash;
  std::string dir;
  std::string scenario;
  Termination termination = Termination::Completed;
  double t_stop = 0.0;
  double wall_seconds = 0.0;
  double diagnostics_seconds = 0.0;
  std::map<std::string, bool> flags;
  std::vector<std::string> files;
};

struct RunOutput {
  RunRecord record;
  ScenarioConfig config;
  Trajectory trajectory;
  std::optional<GroundState> ground_state;
  bool has_asymptotics = false;
  RadiationEstimate radiation;
  DecompositionSeries series;
  LocalizationProfile frequency;
  LocalizationProfile spatial;
  ConcentrationReport concentration;
  PetiteReport petite;
  std::vector<NormReport> norms;
};

// Layout of a run directory:
//   manifest.txt       canonical config, hash, probe span, termination, flags
//   diagnostics.csv    t,mass,hamiltonian,h_norm,termination
//   monitor.csv        t,h_norm,band_fraction (blow-up monitor, when enabled)
//   decomposition.csv  t,v_h_norm,duhamel_residual,backprop_distance
//   localization.csv   t,key,value (dyadic and spatial tables, fitted exponents)
//   concentration.csv  t,R,R2,ball_mass,enlarged_mass,total_mass,fires,clears
//   petite.csv         t,key,value (indicators and radiation scalars)
//   norms.csv          norm,interval,value,bound_shape_value,ratio
//   fields/*.bin       u0, final, u_plus, v_final, ground_state
//   summary.json       derived from the CSVs by report(summary)
RunOutput run(const ScenarioConfig& cfg, const std::string& out_dir);

enum class ReportKind { Summary, Localization, Norms };
ReportKind parse_report_kind(const std::string& s);

// Writes <run>/<kind>.json and SVG plots under <run>/plots; returns the JSON text.
std::string report(const std::string& run_dir, ReportKind kind);

struct SweepEntry {
  std::string config_path;
  bool ok = false;
  std::string error;
  RunRecord record;
  PetiteReport petite;
  bool has_petite = false;
};

std::vector<std::string> expand_glob(const std::string& pattern);

// Share-nothing workers; each config runs into out_root/<config stem>.
// Writes out_root/sweep.csv once all runs are done.
std::vector<SweepEntry> sweep(const std::vector<std::string>& config_paths, std::size_t jobs,
                              const std::string& out_root);

}  // namespace nlslab
