// coiest command-line front end: estimate, simulate, compare.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "coiest/pipeline.hpp"

namespace {

int report_error(const std::string& code, const std::string& module, const std::string& message, int status) {
  std::cout << coiest::error_json(code, module, message).dump(2) << std::endl;
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Center-of-inertia frequency, RoCoF and event-size estimation from multi-sensor frequency data"};
  app.require_subcommand(1);

  coiest::RunConfig cfg;
  std::string inertia;
  double t0 = 0.0;
  double f0 = 0.0;
  std::string out;
  std::string format = "json";
  std::string rocof_source = "fit";

  auto* estimate = app.add_subcommand("estimate", "Estimate COI frequency, RoCoF and event MW from a CSV");
  estimate->add_option("--input", cfg.input_path, "Measurement CSV (timestamp,<id>...)")->required();
  estimate->add_option("--inertia", inertia, "Inertia CSV (unit_id,h_s,cap_mva,committed)");
  estimate->add_option("--omega", cfg.omega, "Relaxation weight on the soft weight constraints")->capture_default_str();
  estimate->add_option("--window-s", cfg.window_seconds, "Fit window length in seconds")->capture_default_str();
  estimate->add_option("--rate", cfg.rate_fps, "Resampling rate, frames per second")->capture_default_str();
  estimate->add_option("--threshold", cfg.rocof_threshold, "Detector RoCoF threshold, Hz/s")->capture_default_str();
  estimate->add_option("--confirm", cfg.confirm_samples, "Detector confirmation samples")->capture_default_str();
  auto* t0_opt = estimate->add_option("--t0", t0, "Manual event start time (epoch s)");
  auto* f0_opt = estimate->add_option("--f0", f0, "Manual event start frequency (Hz)");
  estimate->add_option("--f-nominal", cfg.f_nominal_hz, "Nominal frequency, Hz")->capture_default_str();
  estimate->add_option("--rocof-source", rocof_source, "RoCoF used for the MW estimate")
      ->check(CLI::IsMember({"fit", "nerc"}))
      ->capture_default_str();
  estimate->add_option("--out", out, "Output path");
  estimate->add_option("--format", format, "Format written to --out")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  t0_opt->needs(f0_opt);
  f0_opt->needs(t0_opt);

  std::string scenario;
  std::string prefix;
  std::optional<std::uint64_t> seed;
  auto* simulate = app.add_subcommand("simulate", "Run the swing-equation oracle and write CSV/JSON outputs");
  simulate->add_option("--scenario", scenario, "Scenario JSON path or preset name")->required();
  simulate->add_option("--out-prefix", prefix, "Output file prefix")->required();
  simulate->add_option("--seed", seed, "Override the scenario noise seed");

  std::string measurements;
  std::string truth;
  coiest::RunConfig cmp_cfg;
  std::string cmp_out;
  auto* compare = app.add_subcommand("compare", "Score proposed and median COI against oracle truth");
  compare->add_option("--measurements", measurements, "Simulated measurement CSV")->required();
  compare->add_option("--truth", truth, "Oracle truth CSV");
  compare->add_option("--omega", cmp_cfg.omega, "Relaxation weight")->capture_default_str();
  compare->add_option("--window-s", cmp_cfg.window_seconds, "Fit window length in seconds")->capture_default_str();
  compare->add_option("--out", cmp_out, "Write the comparison JSON here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("usage", "report_cli", e.what(), 2);
  }

  try {
    if (*estimate) {
      if (!inertia.empty()) cfg.inertia_path = inertia;
      if (*t0_opt) {
        cfg.t0 = t0;
        cfg.f0 = f0;
      }
      if (!out.empty()) cfg.output_path = out;
      cfg.output_format = format == "csv" ? coiest::OutputFormat::kCsv : coiest::OutputFormat::kJson;
      cfg.rocof_source = rocof_source == "nerc" ? coiest::RocofSource::kNerc : coiest::RocofSource::kFit;
      const auto report = coiest::cmd_estimate(cfg);
      if (!cfg.output_path) std::cout << report.dump(2) << std::endl;
    } else if (*simulate) {
      const auto files = coiest::cmd_simulate(scenario, prefix, seed);
      std::cout << coiest::Json{{"measurements", files.measurements_path},
                                {"truth", files.truth_path},
                                {"scenario", files.scenario_path}}
                       .dump(2)
                << std::endl;
    } else if (*compare) {
      if (truth.empty()) return report_error("usage", "report_cli", "compare requires --truth", 2);
      cmp_cfg.input_path = measurements;
      if (!cmp_out.empty()) cmp_cfg.output_path = cmp_out;
      const auto report = coiest::cmd_compare(measurements, truth, cmp_cfg);
      if (!cmp_cfg.output_path) std::cout << report.dump(2) << std::endl;
    }
  } catch (const coiest::Error& e) {
    return report_error(e.code(), e.module(), e.what(), coiest::exit_code(e.kind()));
  } catch (const std::exception& e) {
    return report_error("internal", "report_cli", e.what(), 1);
  }
  return 0;
}
