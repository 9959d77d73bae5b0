// sim: command-line front end for the EDCF/roaming simulator.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "edcasim/runner.hpp"
#include "edcasim/scenario.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitAudit = 2;

struct Overrides {
  std::optional<double> duration;
  std::optional<double> warmup;
  std::optional<double> load;
};

edcasim::Scenario resolve(const std::string& name, const Overrides& o) {
  edcasim::Scenario s = edcasim::load_scenario(name);
  if (o.duration) s.duration_s = *o.duration;
  if (o.warmup) s.warmup_s = *o.warmup;
  if (o.load) s.load_multiplier = *o.load;
  s.validate();
  return s;
}

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--duration", o.duration, "simulated seconds");
  cmd->add_option("--warmup", o.warmup, "seconds excluded from the metrics");
  cmd->add_option("--load", o.load, "divides every flow's inter-arrival interval");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EDCF / DCF wireless LAN simulator with mobility and roaming"};
  app.require_subcommand(1);

  std::string scenario_name;
  Overrides overrides;
  std::uint64_t seed = 1;
  std::string out_dir;
  bool trace = false;

  auto* run = app.add_subcommand("run", "run one scenario and write its outputs");
  run->add_option("--scenario", scenario_name, "scenario file or preset (A, B, C)")->required();
  run->add_option("--seed", seed, "random seed")->required();
  run->add_option("--out", out_dir, "output directory")->required();
  run->add_flag("--trace", trace, "also write events.csv");
  add_overrides(run, overrides);

  std::uint64_t n_seeds = 5;
  std::uint64_t first_seed = 1;
  unsigned jobs = 1;
  std::string sweep_out;
  auto* sweep = app.add_subcommand("sweep", "run seeds first..first+n-1 and aggregate per flow");
  sweep->add_option("--scenario", scenario_name, "scenario file or preset (A, B, C)")->required();
  sweep->add_option("--seeds", n_seeds, "number of seeds")->check(CLI::PositiveNumber);
  sweep->add_option("--first-seed", first_seed, "first seed");
  sweep->add_option("--jobs", jobs, "parallel runs (0: hardware threads)");
  sweep->add_option("--out", sweep_out, "write per-seed outputs and sweep.json here");
  add_overrides(sweep, overrides);

  std::uint32_t stations = 10;
  std::uint32_t payload = 800;
  double measured = 60.0;
  auto* vdcf = app.add_subcommand("validate-dcf", "saturated DCF vs the analytic fixed point");
  vdcf->add_option("--stations", stations, "number of stations (>= 2)")->required();
  vdcf->add_option("--payload", payload, "payload bytes");
  vdcf->add_option("--seed", seed, "random seed");
  vdcf->add_option("--measure", measured, "measured seconds after warmup");

  std::string in_dir;
  auto* report = app.add_subcommand("report", "re-derive summaries and CDF tables from raw CSVs");
  report->add_option("--in", in_dir, "directory written by `sim run`")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) {
      const auto scenario = resolve(scenario_name, overrides);
      const auto summary = edcasim::run_to_directory(scenario, seed, out_dir, trace);
      std::cout << edcasim::format_summary_table(summary);
    } else if (*sweep) {
      const auto scenario = resolve(scenario_name, overrides);
      std::vector<std::uint64_t> seeds;
      for (std::uint64_t i = 0; i < n_seeds; ++i) seeds.push_back(first_seed + i);
      if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
      std::optional<std::filesystem::path> out;
      if (!sweep_out.empty()) out = sweep_out;
      const auto runs = edcasim::sweep(scenario, seeds, jobs, out);
      const auto rows = edcasim::aggregate(runs);
      std::cout << "scenario " << scenario.name << ", " << runs.size() << " seeds\n"
                << edcasim::format_sweep_table(rows);
      if (out) edcasim::write_file_atomic(*out / "sweep.json", edcasim::sweep_json(scenario, runs, rows));
    } else if (*vdcf) {
      const auto v = edcasim::validate_dcf(stations, payload, seed, measured);
      std::cout << edcasim::format_dcf_validation(v);
    } else if (*report) {
      const auto summary = edcasim::report_directory(in_dir);
      std::cout << edcasim::format_summary_table(summary);
    }
  } catch (const edcasim::AuditError& e) {
    std::cerr << "audit failure: " << e.what() << "\n";
    return kExitAudit;
  } catch (const edcasim::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitAudit;
  }
  return kExitOk;
}
