#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "nlslab/acceptance.hpp"
#include "nlslab/error.hpp"
#include "nlslab/harness.hpp"

namespace {

enum Exit { kOk = 0, kConfig = 1, kRuntime = 2, kAcceptance = 3 };

int run_command(const std::string& config, const std::string& out) {
  const nlslab::ScenarioConfig cfg = nlslab::load_config(config);
  const nlslab::RunOutput r = nlslab::run(cfg, out);
  std::cout << "run " << out << ": " << r.record.scenario << ", " << nlslab::termination_name(r.record.termination)
            << " at t=" << r.record.t_stop << ", config " << r.record.config_hash << ", " << r.record.wall_seconds
            << " s\n";
  return kOk;
}

int sweep_command(const std::string& pattern, std::size_t jobs, const std::string& out) {
  const auto paths = nlslab::expand_glob(pattern);
  const auto entries = nlslab::sweep(paths, jobs, out);
  int code = kOk;
  std::size_t ok = 0;
  for (const auto& e : entries) {
    if (e.ok) {
      ++ok;
      continue;
    }
    std::cerr << e.config_path << ": " << e.error << '\n';
    const bool config_error = e.error.rfind(nlslab::kind_name(nlslab::ErrorKind::ConfigInvalid), 0) == 0;
    code = std::max(code, config_error ? int(kConfig) : int(kRuntime));
  }
  std::cout << "sweep: " << ok << "/" << entries.size() << " runs ok, table in "
            << (std::filesystem::path(out) / "sweep.csv").string() << '\n';
  return code;
}

int verify_command(const std::string& work) {
  bool all = true;
  nlslab::run_acceptance(work, [&](const nlslab::CriterionResult& r) {
    all = all && r.pass;
    std::cout << nlslab::format_result(r) << std::endl;
  });
  return all ? kOk : kAcceptance;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nlslab: radial NLS experiments"};
  app.require_subcommand(1);

  std::string config, out = "run", run_dir, kind = "summary", pattern, sweep_out = "sweep";
  std::string work = (std::filesystem::temp_directory_path() / "nlslab_acceptance").string();
  std::size_t jobs = 1;

  auto* run = app.add_subcommand("run", "Run one scenario config");
  run->add_option("--config", config, "Config file")->required();
  run->add_option("--out", out, "Run directory")->required();

  auto* report = app.add_subcommand("report", "Summarize a finished run");
  report->add_option("--run", run_dir, "Run directory")->required();
  report->add_option("--kind", kind, "summary, localization or norms")
      ->check(CLI::IsMember({"summary", "localization", "norms"}));

  auto* sweep = app.add_subcommand("sweep", "Run many configs");
  sweep->add_option("--configs", pattern, "Glob of config files")->required();
  sweep->add_option("--jobs", jobs, "Parallel workers")->check(CLI::PositiveNumber);
  sweep->add_option("--out", sweep_out, "Root of the run directories");

  auto* verify = app.add_subcommand("verify", "Run the acceptance suite");
  verify->add_option("--work", work, "Directory for the acceptance runs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfig;
  }

  try {
    if (*run) return run_command(config, out);
    if (*report) {
      std::cout << nlslab::report(run_dir, nlslab::parse_report_kind(kind));
      return kOk;
    }
    if (*sweep) return sweep_command(pattern, jobs, sweep_out);
    if (*verify) return verify_command(work);
  } catch (const nlslab::Error& e) {
    std::cerr << "nlslab: " << e.what() << '\n';
    return e.kind() == nlslab::ErrorKind::ConfigInvalid ? kConfig : kRuntime;
  } catch (const std::exception& e) {
    std::cerr << "nlslab: " << e.what() << '\n';
    return kRuntime;
  }
  return kOk;
}
