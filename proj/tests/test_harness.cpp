#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "nlslab/error.hpp"
#include "nlslab/harness.hpp"

using namespace nlslab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "nlslab_test_harness" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

ErrorKind kind_of(const std::function<void()>& f, std::string* message = nullptr) {
  try {
    f();
  } catch (const Error& e) {
    if (message) *message = e.what();
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Io;
}

const char* kQuickConfig = R"(# short small-data run
scenario = small_data
time.t_end = 2
time.dt = 5e-3
time.sample_every = 25
grid.n = 256
diagnostics.radii = 2, 5, 10
)";

}  // namespace

TEST_CASE("config parsing, defaults and errors") {
  const ScenarioConfig c = parse_config(kQuickConfig);
  CHECK(c.scenario == Scenario::SmallData);
  CHECK(c.amplitude == 1e-2);
  CHECK(c.t_end == 2.0);
  CHECK(c.n == 256);
  CHECK(c.radii == std::vector<double>{2.0, 5.0, 10.0});

  // The scenario line selects defaults wherever it appears.
  const ScenarioConfig late = parse_config("time.order = 2\nscenario = soliton\n");
  CHECK(late.scenario == Scenario::Soliton);
  CHECK(late.order == 2);
  CHECK(ScenarioConfig::defaults(Scenario::Soliton).order == 4);
  CHECK(ScenarioConfig::defaults(Scenario::Defocusing).sign == 1);

  std::string msg;
  CHECK(kind_of([] { parse_config("grid.n = 8\n"); }, &msg) == ErrorKind::ConfigInvalid);
  CHECK(msg.find("grid.n") != std::string::npos);
  CHECK(kind_of([] { parse_config("grid.spacing = 2\n"); }, &msg) == ErrorKind::ConfigInvalid);
  CHECK(msg.find("grid.spacing") != std::string::npos);
  CHECK(kind_of([] { parse_config("grid.n = 512\ngrid.n = 256\n"); }, &msg) == ErrorKind::ConfigInvalid);
  CHECK(msg.find("duplicate") != std::string::npos);
  CHECK(kind_of([] { parse_config("time.dt = fast\n"); }, &msg) == ErrorKind::ConfigInvalid);
  CHECK(msg.find("time.dt") != std::string::npos);
  CHECK(kind_of([] { parse_config("scenario = vortex\n"); }) == ErrorKind::ConfigInvalid);
  CHECK(kind_of([] { parse_config("diagnostics.radii = 2, 50\n"); }) == ErrorKind::ConfigInvalid);
  CHECK(kind_of([] { parse_config("scenario = soliton\nequation.sign = defocusing\n"); }) ==
        ErrorKind::ConfigInvalid);
  CHECK(kind_of([] { load_config("/nonexistent/run.cfg"); }) == ErrorKind::ConfigInvalid);
}

TEST_CASE("canonical text round trips") {
  ScenarioConfig c = ScenarioConfig::defaults(Scenario::PerturbedGroundState);
  c.seed = 42;
  c.concentration = {{1.0, 4.0}, {2.0, 10.0}};
  c.dt_auto = true;
  const ScenarioConfig back = parse_config(c.canonical());
  CHECK(back.canonical() == c.canonical());
  CHECK(back.hash() == c.hash());
  c.seed = 43;
  CHECK(c.hash() != back.hash());
  CHECK(c.hash().size() == 16);
}

TEST_CASE("step above the stability cap is a config error naming time.dt") {
  ScenarioConfig c = ScenarioConfig::defaults(Scenario::BlowupProbe);
  c.dt_auto = false;
  c.dt = 1e-2;
  std::string msg;
  CHECK(kind_of([&] { run(c, scratch("cap").string()); }, &msg) == ErrorKind::ConfigInvalid);
  CHECK(msg.find("time.dt") != std::string::npos);
}

TEST_CASE("perturbed ground state data") {
  ScenarioConfig c = ScenarioConfig::defaults(Scenario::PerturbedGroundState);
  c.amplitude = 1e-2;
  const RadialGrid g = build_grid(5, 40.0, 1024);
  std::optional<GroundState> gs;
  const RadialField u = initial_data(c, g, &gs);
  REQUIRE(gs.has_value());
  double dev = 0.0, q0 = 0.0;
  for (std::size_t i = 0; i < g.n(); ++i) {
    dev = std::max(dev, std::abs(u.values[i] - gs->profile.values[i]));
    q0 = std::max(q0, std::abs(gs->profile.values[i]));
  }
  CHECK(dev == doctest::Approx(1e-2 * q0).epsilon(1e-12));
  c.seed = 1;
  CHECK(norm(initial_data(c, g) - u, Space::l2()) > 0.0);
}

TEST_CASE("run writes a reproducible directory") {
  const ScenarioConfig c = parse_config(kQuickConfig);
  const fs::path a = scratch("run_a"), b = scratch("run_b");
  const RunOutput out = run(c, a.string());
  run(c, b.string());
  CHECK(out.record.termination == Termination::Completed);
  CHECK(out.has_asymptotics);
  for (const char* f : {"manifest.txt", "diagnostics.csv", "decomposition.csv", "localization.csv",
                        "concentration.csv", "petite.csv", "norms.csv", "summary.json", "fields/u0.bin",
                        "fields/u_plus.bin"})
    CHECK_MESSAGE(fs::exists(a / f), f);
  for (const char* f : {"diagnostics.csv", "decomposition.csv", "localization.csv", "petite.csv"})
    CHECK_MESSAGE(slurp(a / f) == slurp(b / f), f);

  const std::string diag = slurp(a / "diagnostics.csv");
  CHECK(diag.rfind("t,mass,hamiltonian,h_norm,termination\n", 0) == 0);
  CHECK(diag.find(",completed\n") != std::string::npos);
  CHECK(slurp(a / "manifest.txt").find("config_hash = " + c.hash()) != std::string::npos);

  const auto summary = nlohmann::json::parse(slurp(a / "summary.json"));
  CHECK(summary["termination"] == "completed");
  CHECK(summary["mass_drift"].get<double>() < 1e-10);
  CHECK(summary["petite"]["radiation"].get<double>() == doctest::Approx(out.petite.radiation));
  CHECK(summary["flags"]["u_plus_bound"] == true);

  const auto loc = nlohmann::json::parse(report(a.string(), ReportKind::Localization));
  CHECK(loc["tails"].size() == 3);
  CHECK(fs::exists(a / "plots" / "tail_vs_R.svg"));
  CHECK(fs::exists(a / "plots" / "dyadic_profile.svg"));
  const auto norms = nlohmann::json::parse(report(a.string(), ReportKind::Norms));
  CHECK(norms.size() == out.norms.size());
  CHECK(parse_report_kind("norms") == ReportKind::Norms);
  CHECK_THROWS_AS(parse_report_kind("plots"), Error);
}

TEST_CASE("report on a missing run") {
  CHECK(kind_of([] { report("/nonexistent/run", ReportKind::Summary); }) == ErrorKind::MissingRun);
}

TEST_CASE("sweep isolates failures") {
  CHECK(sweep({}, 2, scratch("sweep_empty").string()).empty());

  const fs::path dir = scratch("sweep");
  std::ofstream(dir / "a.cfg") << kQuickConfig;
  std::ofstream(dir / "b.cfg") << "scenario = linear\ngrid.n = 8\n";
  std::ofstream(dir / "c.cfg") << "scenario = linear\ntime.t_end = 1\ngrid.n = 256\n";
  const auto paths = expand_glob((dir / "*.cfg").string());
  REQUIRE(paths.size() == 3);
  const auto entries = sweep(paths, 2, (dir / "out").string());
  REQUIRE(entries.size() == 3);
  CHECK(entries[0].ok);
  CHECK_FALSE(entries[1].ok);
  CHECK(entries[1].error.find("grid.n") != std::string::npos);
  CHECK(entries[2].ok);
  const std::string table = slurp(dir / "out" / "sweep.csv");
  CHECK(std::count(table.begin(), table.end(), '\n') == 4);
  CHECK(table.find(",failed,") != std::string::npos);
  CHECK(fs::exists(dir / "out" / "a" / "summary.json"));
  CHECK_FALSE(fs::exists(dir / "out" / "b" / "manifest.txt"));
}

TEST_CASE("shipped configs parse") {
  const auto paths = expand_glob(std::string(NLSLAB_SOURCE_DIR) + "/configs/*.cfg");
  const auto sweep_paths = expand_glob(std::string(NLSLAB_SOURCE_DIR) + "/configs/sweep/*.cfg");
  CHECK(paths.size() == 5);
  CHECK(sweep_paths.size() == 3);
  for (const auto& p : paths) CHECK_NOTHROW(load_config(p));
  for (const auto& p : sweep_paths) CHECK_NOTHROW(load_config(p));
  const ScenarioConfig s = load_config(std::string(NLSLAB_SOURCE_DIR) + "/configs/soliton.cfg");
  CHECK(s.hash() == ScenarioConfig::defaults(Scenario::Soliton).hash());
}
