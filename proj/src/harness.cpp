#include "nlslab/harness.hpp"

#include <glob.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "nlslab/error.hpp"
#include "nlslab/field_io.hpp"
#include "nlslab/propagator.hpp"
#include "nlslab/spectral.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace nlslab {

namespace {

constexpr std::pair<Scenario, const char*> kScenarioNames[] = {
    {Scenario::Linear, "linear"},
    {Scenario::SmallData, "small_data"},
    {Scenario::Defocusing, "defocusing"},
    {Scenario::Soliton, "soliton"},
    {Scenario::SolitonPlusRadiation, "soliton_plus_radiation"},
    {Scenario::PerturbedGroundState, "perturbed_ground_state"},
    {Scenario::BlowupProbe, "blowup_probe"},
    {Scenario::Custom, "custom"},
};

[[noreturn]] void invalid(const std::string& key, const std::string& why) {
  throw Error(ErrorKind::ConfigInvalid, key + ": " + why);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  double x = 0.0;
  const char* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || ptr != end || !std::isfinite(x)) invalid(key, "expected a number, got '" + v + "'");
  return x;
}

long long to_int(const std::string& key, const std::string& v) {
  long long x = 0;
  const char* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || ptr != end) invalid(key, "expected an integer, got '" + v + "'");
  return x;
}

std::size_t to_count(const std::string& key, const std::string& v) {
  const long long x = to_int(key, v);
  if (x < 0) invalid(key, "must not be negative");
  return static_cast<std::size_t>(x);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  invalid(key, "expected true or false, got '" + v + "'");
}

std::string fmt(double x) {
  std::ostringstream out;
  out << std::setprecision(17) << x;
  return out.str();
}

template <class T, class F>
std::string join(const std::vector<T>& xs, F&& f) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + f(xs[i]);
  return out;
}

void apply_key(ScenarioConfig& c, const std::string& key, const std::string& v) {
  if (key == "seed") c.seed = static_cast<std::uint64_t>(to_count(key, v));
  else if (key == "equation.d") c.dim = static_cast<int>(to_int(key, v));
  else if (key == "equation.p") c.p = to_double(key, v);
  else if (key == "equation.sign") {
    if (v == "focusing" || v == "-1") c.sign = -1;
    else if (v == "defocusing" || v == "+1" || v == "1") c.sign = 1;
    else invalid(key, "expected focusing, defocusing, -1 or +1, got '" + v + "'");
  } else if (key == "grid.rmax") c.rmax = to_double(key, v);
  else if (key == "grid.n") c.n = to_count(key, v);
  else if (key == "time.dt") {
    c.dt_auto = v == "auto";
    if (!c.dt_auto) c.dt = to_double(key, v);
  } else if (key == "time.t_end") c.t_end = to_double(key, v);
  else if (key == "time.sample_every") c.sample_every = to_count(key, v);
  else if (key == "time.order") c.order = static_cast<int>(to_int(key, v));
  else if (key == "time.monitor_every") c.monitor_every = to_count(key, v);
  else if (key == "time.track_duhamel") c.track_duhamel = to_bool(key, v);
  else if (key == "data.amplitude") c.amplitude = to_double(key, v);
  else if (key == "data.width") c.width = to_double(key, v);
  else if (key == "data.center") c.center = to_double(key, v);
  else if (key == "data.phase") c.phase = to_double(key, v);
  else if (key == "data.omega") c.omega = to_double(key, v);
  else if (key == "data.radiation_amplitude") c.radiation_amplitude = to_double(key, v);
  else if (key == "data.radiation_center") c.radiation_center = to_double(key, v);
  else if (key == "data.radiation_width") c.radiation_width = to_double(key, v);
  else if (key == "data.radiation_phase") c.radiation_phase = to_double(key, v);
  else if (key == "diagnostics.radii") {
    c.radii.clear();
    for (const auto& s : split(v, ',')) c.radii.push_back(to_double(key, s));
  } else if (key == "diagnostics.bands") {
    c.bands.clear();
    for (const auto& s : split(v, ',')) c.bands.push_back(static_cast<int>(to_int(key, s)));
  } else if (key == "diagnostics.probes") c.probe_count = to_count(key, v);
  else if (key == "diagnostics.probe_width") c.probe_width = to_double(key, v);
  else if (key == "diagnostics.late_fraction") c.knobs.late_fraction = to_double(key, v);
  else if (key == "diagnostics.concentration") {
    c.concentration.clear();
    for (const auto& s : split(v, ',')) {
      const auto parts = split(s, ':');
      if (parts.size() != 2) invalid(key, "expected R:R' pairs, got '" + s + "'");
      c.concentration.emplace_back(to_double(key, parts[0]), to_double(key, parts[1]));
    }
  } else if (key == "diagnostics.concentration_threshold") c.concentration_threshold = to_double(key, v);
  else if (key == "diagnostics.mu0") c.knobs.mu0 = to_double(key, v);
  else if (key == "diagnostics.mu1") c.knobs.mu1 = to_double(key, v);
  else if (key == "diagnostics.mu2") c.knobs.mu2 = to_double(key, v);
  else if (key == "diagnostics.mu3") c.knobs.mu3 = to_double(key, v);
  else if (key == "diagnostics.mu4") c.knobs.mu4 = to_double(key, v);
  else if (key == "diagnostics.asymptotics") c.asymptotics = to_bool(key, v);
  else if (key == "diagnostics.norms") c.norms = to_bool(key, v);
  else invalid(key, "unknown key");
}

}  // namespace

std::string scenario_name(Scenario s) {
  for (const auto& [k, name] : kScenarioNames)
    if (k == s) return name;
  return "custom";
}

Scenario parse_scenario(const std::string& name) {
  for (const auto& [k, n] : kScenarioNames)
    if (name == n) return k;
  invalid("scenario", "unknown scenario '" + name + "'");
}

ScenarioConfig ScenarioConfig::defaults(Scenario s) {
  ScenarioConfig c;
  c.scenario = s;
  switch (s) {
    case Scenario::Linear:
      c.dt = 1e-2;
      c.sample_every = 10;
      break;
    case Scenario::SmallData:
      c.amplitude = 1e-2;
      c.t_end = 50.0;
      c.sample_every = 250;
      break;
    case Scenario::Defocusing:
      c.sign = 1;
      break;
    case Scenario::Soliton:
    case Scenario::SolitonPlusRadiation:
      c.order = 4;
      break;
    case Scenario::PerturbedGroundState:
      c.order = 4;
      c.amplitude = 1e-2;
      break;
    case Scenario::BlowupProbe:
      c.amplitude = 30.0;
      c.dt_auto = true;
      c.sample_every = 10;
      c.monitor_every = 1;
      break;
    case Scenario::Custom:
      break;
  }
  return c;
}

NlsParams ScenarioConfig::params() const {
  if (scenario == Scenario::Linear) return NlsParams::linear(dim);
  return NlsParams::make(dim, p, sign);
}

bool ScenarioConfig::uses_ground_state() const {
  return scenario == Scenario::Soliton || scenario == Scenario::SolitonPlusRadiation ||
         scenario == Scenario::PerturbedGroundState;
}

std::string ScenarioConfig::canonical() const {
  std::ostringstream o;
  o << "scenario = " << scenario_name(scenario) << '\n'
    << "seed = " << seed << '\n'
    << "equation.d = " << dim << '\n'
    << "equation.p = " << fmt(p) << '\n'
    << "equation.sign = " << (sign < 0 ? "focusing" : "defocusing") << '\n'
    << "grid.rmax = " << fmt(rmax) << '\n'
    << "grid.n = " << n << '\n'
    << "time.dt = " << (dt_auto ? std::string("auto") : fmt(dt)) << '\n'
    << "time.t_end = " << fmt(t_end) << '\n'
    << "time.sample_every = " << sample_every << '\n'
    << "time.order = " << order << '\n'
    << "time.monitor_every = " << monitor_every << '\n'
    << "time.track_duhamel = " << (track_duhamel ? "true" : "false") << '\n'
    << "data.amplitude = " << fmt(amplitude) << '\n'
    << "data.width = " << fmt(width) << '\n'
    << "data.center = " << fmt(center) << '\n'
    << "data.phase = " << fmt(phase) << '\n'
    << "data.omega = " << fmt(omega) << '\n'
    << "data.radiation_amplitude = " << fmt(radiation_amplitude) << '\n'
    << "data.radiation_center = " << fmt(radiation_center) << '\n'
    << "data.radiation_width = " << fmt(radiation_width) << '\n'
    << "data.radiation_phase = " << fmt(radiation_phase) << '\n'
    << "diagnostics.radii = " << join(radii, fmt) << '\n'
    << "diagnostics.bands = " << join(bands, [](int j) { return std::to_string(j); }) << '\n'
    << "diagnostics.probes = " << probe_count << '\n'
    << "diagnostics.probe_width = " << fmt(probe_width) << '\n'
    << "diagnostics.late_fraction = " << fmt(knobs.late_fraction) << '\n'
    << "diagnostics.concentration = "
    << join(concentration, [](const std::pair<double, double>& q) { return fmt(q.first) + ":" + fmt(q.second); })
    << '\n'
    << "diagnostics.concentration_threshold = " << fmt(concentration_threshold) << '\n'
    << "diagnostics.mu0 = " << fmt(knobs.mu0) << '\n'
    << "diagnostics.mu1 = " << fmt(knobs.mu1) << '\n'
    << "diagnostics.mu2 = " << fmt(knobs.mu2) << '\n'
    << "diagnostics.mu3 = " << fmt(knobs.mu3) << '\n'
    << "diagnostics.mu4 = " << fmt(knobs.mu4) << '\n'
    << "diagnostics.asymptotics = " << (asymptotics ? "true" : "false") << '\n'
    << "diagnostics.norms = " << (norms ? "true" : "false") << '\n';
  return o.str();
}

std::string ScenarioConfig::hash() const {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : canonical()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

void ScenarioConfig::validate() const {
  if (dim < 3) invalid("equation.d", "must be at least 3");
  if (!(p > 1.0)) invalid("equation.p", "must exceed 1");
  if (sign != 1 && sign != -1) invalid("equation.sign", "must be focusing or defocusing");
  if (!(rmax > 0.0)) invalid("grid.rmax", "must be positive");
  if (n < 64) invalid("grid.n", "must be at least 64 (got " + std::to_string(n) + ")");
  if (!dt_auto && !(dt > 0.0)) invalid("time.dt", "must be positive");
  if (!(t_end >= 0.0)) invalid("time.t_end", "must not be negative");
  if (sample_every == 0) invalid("time.sample_every", "must be at least 1");
  if (order != 2 && order != 4 && order != 6 && order != 8) invalid("time.order", "must be 2, 4, 6 or 8");
  if (!(width > 0.0)) invalid("data.width", "must be positive");
  if (!(radiation_width > 0.0)) invalid("data.radiation_width", "must be positive");
  if (uses_ground_state()) {
    if (!(omega > 0.0)) invalid("data.omega", "must be positive");
    if (sign != -1) invalid("equation.sign", "ground-state scenarios need the focusing sign");
    if (!params().energy_subcritical()) invalid("equation.p", "ground-state scenarios need p < 1 + 4/(d-2)");
  }
  if (radii.empty()) invalid("diagnostics.radii", "must not be empty");
  for (double r : radii)
    if (!(r > 0.0 && r < rmax)) invalid("diagnostics.radii", "radius " + fmt(r) + " outside (0, rmax)");
  if (std::none_of(radii.begin(), radii.end(), [&](double r) { return r <= 0.5 * rmax; }))
    invalid("diagnostics.radii", "needs a radius not above rmax/2");
  for (int j : bands)
    if (j < DyadicBand::kMinExponent || j > DyadicBand::kMaxExponent)
      invalid("diagnostics.bands", "band exponent " + std::to_string(j) + " outside -20..20");
  if (probe_count < 1 || probe_count > 64) invalid("diagnostics.probes", "must be in 1..64");
  if (!(probe_width > 0.0)) invalid("diagnostics.probe_width", "must be positive");
  if (!(knobs.late_fraction > 0.0 && knobs.late_fraction <= 1.0))
    invalid("diagnostics.late_fraction", "must be in (0, 1]");
  for (const auto& [r, r2] : concentration)
    if (!(r >= 0.0 && r <= r2 && r2 < rmax)) invalid("diagnostics.concentration", "pairs need 0 <= R <= R' < rmax");
  if (!(concentration_threshold > 0.0)) invalid("diagnostics.concentration_threshold", "must be positive");
  const double mus[] = {knobs.mu0, knobs.mu1, knobs.mu2, knobs.mu3, knobs.mu4};
  for (int i = 0; i < 5; ++i)
    if (!(mus[i] > 0.0)) invalid("diagnostics.mu" + std::to_string(i), "must be positive");
}

ScenarioConfig parse_config(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  std::string scenario = "custom";
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) invalid("line " + std::to_string(lineno), "expected key = value");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key.empty()) invalid("line " + std::to_string(lineno), "empty key");
    if (!seen.insert(key).second) invalid(key, "duplicate key");
    if (key == "scenario") scenario = value;
    else entries.emplace_back(key, value);
  }
  ScenarioConfig c = ScenarioConfig::defaults(parse_scenario(scenario));
  for (const auto& [k, v] : entries) apply_key(c, k, v);
  c.validate();
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigInvalid, "config: cannot read '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

RadialField initial_data(const ScenarioConfig& cfg, const RadialGrid& grid, std::optional<GroundState>* gs) {
  const auto packet = [&grid](double a, double c, double w, double k) {
    return RadialField::sample(grid, [=](double r) {
      const double x = (r - c) / w;
      return a * std::exp(-x * x) * std::exp(cplx(0.0, k * r));
    });
  };
  if (!cfg.uses_ground_state()) return packet(cfg.amplitude, cfg.center, cfg.width, cfg.phase);
  GroundState q = solve_ground_state(cfg.params(), cfg.omega, grid, 1e-10);
  RadialField u = q.profile;
  if (cfg.scenario == Scenario::SolitonPlusRadiation)
    u += packet(cfg.radiation_amplitude, cfg.radiation_center, cfg.radiation_width, cfg.radiation_phase);
  if (cfg.scenario == Scenario::PerturbedGroundState) {
    // Q + amplitude Q(0) g / max|g| with g drawn from the random smooth family.
    const RadialField g = random_smooth_field(grid, cfg.seed);
    double gmax = 0.0, qmax = 0.0;
    for (const cplx& z : g.values) gmax = std::max(gmax, std::abs(z));
    for (const cplx& z : q.profile.values) qmax = std::max(qmax, std::abs(z));
    u += cplx(cfg.amplitude * qmax / gmax) * g;
  }
  if (gs) *gs = std::move(q);
  return u;
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::MissingRun, "missing " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string diagnostics_csv(const Trajectory& tr) {
  std::ostringstream o;
  o << std::setprecision(17) << "t,mass,hamiltonian,h_norm,termination\n";
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const SampleDiagnostics& d = tr.diagnostics[i];
    const bool last = i + 1 == tr.size();
    o << tr.times[i] << ',' << d.mass << ',' << d.hamiltonian << ',' << d.h_norm << ','
      << (last ? termination_name(tr.termination) : std::string("running")) << '\n';
  }
  return o.str();
}

std::string monitor_csv(const Trajectory& tr) {
  std::ostringstream o;
  o << std::setprecision(17) << "t,h_norm,band_fraction\n";
  for (const MonitorRow& m : tr.monitor) o << m.t << ',' << m.h_norm << ',' << m.band_fraction << '\n';
  return o.str();
}

std::string decomposition_csv(const DecompositionSeries& s, const RadiationEstimate& est) {
  std::ostringstream o;
  o << std::setprecision(17) << "t,v_h_norm,duhamel_residual,backprop_distance\n";
  for (std::size_t i = 0; i < s.times.size(); ++i) {
    o << s.times[i] << ',' << s.v_h_norms[i] << ',';
    if (i < s.duhamel_residuals.size()) o << s.duhamel_residuals[i];
    o << ',';
    if (i >= est.window.first && i <= est.window.last) o << est.backprop_distance[i - est.window.first];
    o << '\n';
  }
  return o.str();
}

std::string concentration_csv(const ConcentrationReport& c) {
  std::ostringstream o;
  o << std::setprecision(17) << "t,R,R2,ball_mass,enlarged_mass,total_mass,fires,clears\n";
  for (const ConcentrationRow& r : c.rows)
    o << r.t << ',' << r.radius << ',' << r.enlarged_radius << ',' << r.ball_mass << ',' << r.enlarged_mass << ','
      << r.total_mass << ',' << (r.fires ? 1 : 0) << ',' << (r.clears ? 1 : 0) << '\n';
  return o.str();
}

std::string radiation_rows(const RadiationEstimate& est, const DecompositionSeries& s, double t) {
  double vmax = 0.0, res = 0.0;
  for (double v : s.v_h_norms) vmax = std::max(vmax, v);
  for (double r : s.duhamel_residuals) res = std::max(res, r);
  std::ostringstream o;
  o << std::setprecision(17);
  o << t << ",cauchy_defect," << est.cauchy_defect << '\n'
    << t << ",radiation_converged," << (est.converged ? 1 : 0) << '\n'
    << t << ",u_plus_h_norm," << s.u_plus_h_norm << '\n'
    << t << ",energy," << s.energy << '\n'
    << t << ",max_v_h_norm," << vmax << '\n'
    << t << ",final_v_h_norm," << s.v_h_norms.back() << '\n';
  if (!s.duhamel_residuals.empty()) o << t << ",max_duhamel_residual," << res << '\n';
  return o.str();
}

std::vector<NormReport> norm_suite(const Trajectory& tr, const ScenarioConfig& cfg, std::string& note) {
  std::vector<NormReport> out;
  const Interval all{0.0, tr.times.back()};
  const Interval unit{0.0, std::min(1.0, tr.times.back())};
  const int d = cfg.dim;
  // Each estimate is independent; an undersampled interval or a missing
  // exponent table only drops the affected rows.
  auto attempt = [&](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      note += (note.empty() ? "" : "; ") + std::string(e.what());
    }
  };
  attempt([&] { out.push_back(strichartz_norm(tr, Exponent::infinity(), Exponent::of(Rational(2)), false, all)); });
  attempt([&] {
    out.push_back(strichartz_norm(tr, Exponent::of(Rational(2)), Exponent::of(Rational(2 * d, d - 2)), false, all));
  });
  attempt([&] { out.push_back(bilinear_norm(tr, 2, -2, unit)); });
  attempt([&] {
    const ExponentTable table = default_exponents(d, cfg.p);
    attempt([&] { out.push_back(strichartz_norm(tr, table.q0, table.r0, true, all)); });
    attempt([&] {
      const SmoothingProfile sp = smoothing_profile(tr, {0, 1, 2, 3}, unit, table);
      out.insert(out.end(), sp.rows.begin(), sp.rows.end());
    });
    NormReport fixed;
    fixed.name = "ffix ratio at t=0";
    fixed.value = ffix_ratio(tr.fields.front(), tr.params, table);
    fixed.bound = 1.0;
    fixed.ratio = fixed.value;
    out.push_back(fixed);
  });
  return out;
}

}  // namespace

RunOutput run(const ScenarioConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  RunOutput out;
  out.config = cfg;
  const RadialGrid grid = build_grid(cfg.dim, cfg.rmax, cfg.n);
  const NlsParams params = cfg.params();
  const RadialField u0 = initial_data(cfg, grid, &out.ground_state);
  const double cap = stability_cap(u0, params);
  double dt = cfg.dt;
  if (cfg.dt_auto) dt = std::isfinite(cap) ? cap : 1e-2;
  if (dt > cap) invalid("time.dt", fmt(dt) + " exceeds the stability cap " + fmt(cap) + " of the initial data");

  EvolveOptions opts;
  opts.order = cfg.order;
  opts.monitor_every = cfg.monitor_every;
  opts.track_duhamel = cfg.track_duhamel;
  out.trajectory = evolve(u0, params, cfg.t_end, dt, cfg.sample_every, opts);
  const Trajectory& tr = out.trajectory;
  const auto t1 = std::chrono::steady_clock::now();

  RunRecord& rec = out.record;
  rec.config_hash = cfg.hash();
  rec.dir = out_dir;
  rec.scenario = scenario_name(cfg.scenario);
  rec.termination = tr.termination;
  rec.t_stop = tr.t_stop;
  rec.flags["mass_supercritical"] = params.mass_supercritical();
  rec.flags["energy_subcritical"] = params.energy_subcritical();
  rec.flags["high_dimension"] = params.high_dimension();
  rec.flags["conformant"] = params.conformant();
  rec.flags["completed"] = tr.completed();

  std::string norms_note;
  ProbeFamily probes;
  if (cfg.asymptotics && tr.completed() && tr.size() >= 2) {
    probes = hermite_probes(grid, cfg.probe_count, cfg.probe_width);
    out.radiation = extract_radiation(tr, probes, late_window(tr, cfg.knobs.late_fraction));
    out.series = weakly_bound(tr, out.radiation);
    out.frequency = frequency_profile(out.series, cfg.bands, cfg.knobs);
    out.spatial = spatial_profile(out.series, cfg.radii, cfg.knobs);
    out.concentration = mass_concentration_track(tr, cfg.concentration, cfg.concentration_threshold,
                                                 cfg.knobs.late_fraction);
    out.petite = petite_report(tr, out.radiation, cfg.radii, cfg.knobs);
    out.has_asymptotics = true;
    const double e = out.series.energy;
    double vmax = 0.0, res = 0.0;
    for (double v : out.series.v_h_norms) vmax = std::max(vmax, v);
    for (double r : out.series.duhamel_residuals) res = std::max(res, r);
    rec.flags["radiation_converged"] = out.radiation.converged;
    rec.flags["u_plus_bound"] = out.series.u_plus_h_norm * out.series.u_plus_h_norm <= e + 1e-6;
    rec.flags["v_bound"] = vmax <= 2.0 * std::sqrt(e) + 1e-6;
    if (!out.series.duhamel_residuals.empty()) rec.flags["duhamel_residual"] = res < 1e-4;
  }
  if (cfg.norms && tr.size() >= 2) out.norms = norm_suite(tr, cfg, norms_note);
  const auto t2 = std::chrono::steady_clock::now();
  rec.diagnostics_seconds = std::chrono::duration<double>(t2 - t1).count();

  const fs::path dir(out_dir);
  fs::create_directories(dir / "fields");
  auto put = [&](const std::string& name, const std::string& text) {
    write_text(dir / name, text);
    rec.files.push_back(name);
  };
  auto put_field = [&](const std::string& name, const RadialField& f) {
    write_field((dir / "fields" / name).string(), f);
    rec.files.push_back("fields/" + name);
  };
  put("diagnostics.csv", diagnostics_csv(tr));
  if (!tr.monitor.empty()) put("monitor.csv", monitor_csv(tr));
  put_field("u0.bin", tr.fields.front());
  put_field("final.bin", tr.fields.back());
  if (out.ground_state) put_field("ground_state.bin", out.ground_state->profile);
  if (out.has_asymptotics) {
    put("decomposition.csv", decomposition_csv(out.series, out.radiation));
    std::string loc = profile_csv(out.frequency);
    const std::string spatial = profile_csv(out.spatial);
    loc += spatial.substr(spatial.find('\n') + 1);
    put("localization.csv", loc);
    put("concentration.csv", concentration_csv(out.concentration));
    put("petite.csv", petite_csv(out.petite) + radiation_rows(out.radiation, out.series, tr.times.back()));
    put_field("u_plus.bin", out.radiation.u_plus);
    put_field("v_final.bin", out.series.v_fields.back());
  }
  if (!out.norms.empty()) put("norms.csv", norm_csv(out.norms));

  rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::ostringstream m;
  m << std::setprecision(17);
  m << "# nlslab run manifest\n" << cfg.canonical();
  m << "config_hash = " << rec.config_hash << '\n'
    << "dt_used = " << tr.dt << '\n'
    << "termination = " << termination_name(tr.termination) << '\n'
    << "t_stop = " << tr.t_stop << '\n'
    << "samples = " << tr.size() << '\n'
    << "wall_seconds = " << rec.wall_seconds << '\n'
    << "diagnostics_seconds = " << rec.diagnostics_seconds << '\n';
  if (out.has_asymptotics) {
    m << "probe_span = " << probes.description << '\n'
      << "late_window = " << tr.times[out.radiation.window.first] << ".." << tr.times[out.radiation.window.last]
      << '\n';
  }
  if (cfg.scenario == Scenario::SolitonPlusRadiation)
    m << "radiation_seed = " << fmt(cfg.radiation_amplitude) << " exp(-((r-" << fmt(cfg.radiation_center) << ")/"
      << fmt(cfg.radiation_width) << ")^2) exp(i " << fmt(cfg.radiation_phase) << " r)\n";
  if (out.ground_state)
    m << "ground_state_residual = " << out.ground_state->residual << '\n'
      << "ground_state_iterations = " << out.ground_state->iterations << '\n';
  if (!norms_note.empty()) m << "norms_note = " << norms_note << '\n';
  for (const auto& [k, v] : rec.flags) m << "flag." << k << " = " << (v ? "true" : "false") << '\n';
  for (const std::string& f : rec.files) m << "file = " << f << '\n';
  write_text(dir / "manifest.txt", m.str());
  report(out_dir, ReportKind::Summary);
  rec.files.push_back("summary.json");
  return out;
}

ReportKind parse_report_kind(const std::string& s) {
  if (s == "summary") return ReportKind::Summary;
  if (s == "localization") return ReportKind::Localization;
  if (s == "norms") return ReportKind::Norms;
  throw Error(ErrorKind::InvalidArgument, "report kind must be summary, localization or norms");
}

namespace {

using Table = std::vector<std::vector<std::string>>;

std::vector<std::string> csv_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') quoted = !quoted;
    else if (c == ',' && !quoted) out.push_back(cur), cur.clear();
    else cur += c;
  }
  out.push_back(cur);
  return out;
}

Table read_csv(const fs::path& path) {
  std::istringstream in(read_text(path));
  Table rows;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line))
    if (!line.empty()) rows.push_back(csv_fields(line));
  return rows;
}

double num(const std::string& s) { return s.empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(s); }

std::map<std::string, std::string> read_manifest(const fs::path& dir) {
  std::map<std::string, std::string> kv;
  std::istringstream in(read_text(dir / "manifest.txt"));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

struct Series {
  std::string name;
  std::vector<double> x, y;
};

std::string svg_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                     const std::vector<Series>& series, bool logx, bool logy) {
  const double w = 640, h = 400, l = 70, r = 20, t = 40, b = 50;
  auto tx = [&](double v) { return logx ? std::log10(v) : v; };
  auto ty = [&](double v) { return logy ? std::log10(v) : v; };
  auto usable = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!logx || x > 0) && (!logy || y > 0);
  };
  double x0 = kInf, x1 = -kInf, y0 = kInf, y1 = -kInf;
  for (const Series& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i)
      if (usable(s.x[i], s.y[i])) {
        x0 = std::min(x0, tx(s.x[i])), x1 = std::max(x1, tx(s.x[i]));
        y0 = std::min(y0, ty(s.y[i])), y1 = std::max(y1, ty(s.y[i]));
      }
  if (!(x0 <= x1)) x0 = 0, x1 = 1;
  if (!(y0 <= y1)) y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  auto px = [&](double v) { return l + (tx(v) - x0) / (x1 - x0) * (w - l - r); };
  auto py = [&](double v) { return h - b - (ty(v) - y0) / (y1 - y0) * (h - t - b); };
  auto label = [](double v, bool lg) {
    std::ostringstream o;
    o << std::setprecision(3) << (lg ? std::pow(10.0, v) : v);
    return o.str();
  };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << w / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << title << "</text>\n"
    << "<line x1=\"" << l << "\" y1=\"" << h - b << "\" x2=\"" << w - r << "\" y2=\"" << h - b << "\" stroke=\"black\"/>\n"
    << "<line x1=\"" << l << "\" y1=\"" << t << "\" x2=\"" << l << "\" y2=\"" << h - b << "\" stroke=\"black\"/>\n"
    << "<text x=\"" << l << "\" y=\"" << h - b + 16 << "\" font-size=\"11\">" << label(x0, logx) << "</text>\n"
    << "<text x=\"" << w - r << "\" y=\"" << h - b + 16 << "\" font-size=\"11\" text-anchor=\"end\">"
    << label(x1, logx) << "</text>\n"
    << "<text x=\"" << l - 4 << "\" y=\"" << h - b << "\" font-size=\"11\" text-anchor=\"end\">" << label(y0, logy)
    << "</text>\n"
    << "<text x=\"" << l - 4 << "\" y=\"" << t + 8 << "\" font-size=\"11\" text-anchor=\"end\">" << label(y1, logy)
    << "</text>\n"
    << "<text x=\"" << w / 2 << "\" y=\"" << h - 12 << "\" text-anchor=\"middle\" font-size=\"12\">" << xlabel
    << "</text>\n"
    << "<text x=\"16\" y=\"" << h / 2 << "\" font-size=\"12\" transform=\"rotate(-90 16 " << h / 2
    << ")\" text-anchor=\"middle\">" << ylabel << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const Series& s = series[k];
    const char* c = colors[k % 5];
    o << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      if (usable(s.x[i], s.y[i])) o << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
    o << "\"/>\n<text x=\"" << w - r - 4 << "\" y=\"" << t + 14 * (k + 1) << "\" font-size=\"11\" fill=\"" << c
      << "\" text-anchor=\"end\">" << s.name << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json summary_json(const fs::path& dir) {
  const auto manifest = read_manifest(dir);
  const Table diag = read_csv(dir / "diagnostics.csv");
  json j;
  j["scenario"] = manifest.count("scenario") ? manifest.at("scenario") : "";
  j["config_hash"] = manifest.count("config_hash") ? manifest.at("config_hash") : "";
  j["samples"] = diag.size();
  if (!diag.empty()) {
    const double m0 = num(diag.front()[1]), h0 = num(diag.front()[2]);
    double md = 0.0, hd = 0.0, hmax = 0.0;
    for (const auto& row : diag) {
      md = std::max(md, std::abs(num(row[1]) - m0) / (m0 == 0.0 ? 1.0 : m0));
      hd = std::max(hd, std::abs(num(row[2]) - h0) / (h0 == 0.0 ? 1.0 : std::abs(h0)));
      hmax = std::max(hmax, num(row[3]));
    }
    j["termination"] = diag.back()[4];
    j["t_stop"] = num(diag.back()[0]);
    j["mass_drift"] = md;
    j["hamiltonian_drift"] = hd;
    j["h_norm_max"] = hmax;
    j["h_norm_final"] = num(diag.back()[3]);
  }
  if (fs::exists(dir / "petite.csv")) {
    json p;
    for (const auto& row : read_csv(dir / "petite.csv")) p[row[1]] = finite_or_null(num(row[2]));
    j["petite"] = p;
  }
  json flags;
  for (const auto& [k, v] : manifest)
    if (k.rfind("flag.", 0) == 0) flags[k.substr(5)] = v == "true";
  j["flags"] = flags;
  return j;
}

json localization_json(const fs::path& dir, std::vector<std::pair<std::string, std::string>>& plots) {
  const Table rows = read_csv(dir / "localization.csv");
  json j;
  double last = -kInf;
  for (const auto& r : rows) last = std::max(last, num(r[0]));
  Series tail{"tail(v,R)", {}, {}}, gtail{"gradient tail", {}, {}}, low{"|P<=N v|_H", {}, {}}, high{"|P>=N v|_H", {}, {}};
  json tails, dyadic;
  for (const auto& r : rows) {
    const std::string& key = r[1];
    const double v = num(r[2]);
    if (key.rfind("fit_", 0) == 0) j[key] = v;
    if (num(r[0]) != last) continue;
    if (key.rfind("tail_R=", 0) == 0) {
      tail.x.push_back(std::stod(key.substr(7))), tail.y.push_back(v);
      tails[key.substr(7)] = v;
    } else if (key.rfind("gradient_tail_R=", 0) == 0) {
      gtail.x.push_back(std::stod(key.substr(16))), gtail.y.push_back(v);
    } else if (key.rfind("low_j=", 0) == 0) {
      low.x.push_back(std::ldexp(1.0, std::stoi(key.substr(6)))), low.y.push_back(v);
      dyadic["low"][key.substr(6)] = v;
    } else if (key.rfind("high_j=", 0) == 0) {
      high.x.push_back(std::ldexp(1.0, std::stoi(key.substr(7)))), high.y.push_back(v);
      dyadic["high"][key.substr(7)] = v;
    }
  }
  j["t"] = last;
  j["tails"] = tails;
  j["dyadic"] = dyadic;
  plots.emplace_back("tail_vs_R.svg", svg_plot("spatial tails of v at t = " + fmt(last), "R", "tail", {tail, gtail},
                                               false, true));
  plots.emplace_back("dyadic_profile.svg",
                     svg_plot("dyadic profile of v at t = " + fmt(last), "N", "H norm", {low, high}, true, true));
  return j;
}

json norms_json(const fs::path& dir) {
  json arr = json::array();
  for (const auto& r : read_csv(dir / "norms.csv"))
    arr.push_back({{"norm", r[0]}, {"interval", r[1]}, {"value", num(r[2])}, {"bound_shape_value", num(r[3])},
                   {"ratio", num(r[4])}});
  return arr;
}

}  // namespace

std::string report(const std::string& run_dir, ReportKind kind) {
  const fs::path dir(run_dir);
  if (!fs::is_directory(dir) || !fs::exists(dir / "manifest.txt"))
    throw Error(ErrorKind::MissingRun, "no run at '" + run_dir + "'");
  std::vector<std::pair<std::string, std::string>> plots;
  json j;
  std::string name;
  switch (kind) {
    case ReportKind::Summary: {
      name = "summary";
      j = summary_json(dir);
      const Table diag = read_csv(dir / "diagnostics.csv");
      Series s{"||u||_H", {}, {}};
      for (const auto& row : diag) s.x.push_back(num(row[0])), s.y.push_back(num(row[3]));
      plots.emplace_back("h_norm_vs_t.svg", svg_plot("H norm", "t", "||u(t)||_H", {s}, false, false));
      break;
    }
    case ReportKind::Localization:
      name = "localization";
      if (!fs::exists(dir / "localization.csv")) throw Error(ErrorKind::MissingRun, "run has no localization table");
      j = localization_json(dir, plots);
      break;
    case ReportKind::Norms:
      name = "norms";
      if (!fs::exists(dir / "norms.csv")) throw Error(ErrorKind::MissingRun, "run has no norm table");
      j = norms_json(dir);
      break;
  }
  const std::string text = j.dump(2) + "\n";
  write_text(dir / (name + ".json"), text);
  if (!plots.empty()) fs::create_directories(dir / "plots");
  for (const auto& [file, svg] : plots) write_text(dir / "plots" / file, svg);
  return text;
}

std::vector<std::string> expand_glob(const std::string& pattern) {
  glob_t g{};
  std::vector<std::string> out;
  if (::glob(pattern.c_str(), 0, nullptr, &g) == 0)
    for (std::size_t i = 0; i < g.gl_pathc; ++i) out.emplace_back(g.gl_pathv[i]);
  globfree(&g);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<SweepEntry> sweep(const std::vector<std::string>& config_paths, std::size_t jobs,
                              const std::string& out_root) {
  std::vector<SweepEntry> entries(config_paths.size());
  if (config_paths.empty()) return entries;
  std::vector<std::string> dirs;
  std::map<std::string, int> used;
  for (const std::string& p : config_paths) {
    std::string stem = fs::path(p).stem().string();
    if (used[stem]++) stem += "_" + std::to_string(used[stem] - 1);
    dirs.push_back((fs::path(out_root) / stem).string());
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < entries.size(); i = next++) {
      SweepEntry& e = entries[i];
      e.config_path = config_paths[i];
      try {
        const RunOutput out = run(load_config(config_paths[i]), dirs[i]);
        e.record = out.record;
        e.petite = out.petite;
        e.has_petite = out.has_asymptotics;
        e.ok = true;
      } catch (const std::exception& ex) {
        e.error = ex.what();
      }
    }
  };
  const std::size_t n = std::max<std::size_t>(1, std::min(jobs, entries.size()));
  std::vector<std::thread> pool;
  for (std::size_t k = 0; k < n; ++k) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();

  std::ostringstream csv;
  csv << std::setprecision(17)
      << "config,status,scenario,termination,radiation,tail_score,gradient_tail_score,precompactness,error\n";
  for (const SweepEntry& e : entries) {
    csv << '"' << e.config_path << "\"," << (e.ok ? "ok" : "failed") << ',' << e.record.scenario << ','
        << (e.ok ? termination_name(e.record.termination) : "") << ',';
    if (e.has_petite)
      csv << e.petite.radiation << ',' << e.petite.tail_score << ',' << e.petite.gradient_tail_score << ','
          << e.petite.precompactness;
    else
      csv << ",,,";
    std::string err = e.error;
    std::replace(err.begin(), err.end(), '"', '\'');
    csv << ",\"" << err << "\"\n";
  }
  fs::create_directories(out_root);
  write_text(fs::path(out_root) / "sweep.csv", csv.str());
  return entries;
}

}  // namespace nlslab
