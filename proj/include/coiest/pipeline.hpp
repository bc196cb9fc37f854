#pragma once

#include <optional>
#include <string>
#include <vector>

#include "coiest/coi.hpp"
#include "coiest/event_detect.hpp"
#include "coiest/ingest.hpp"
#include "coiest/json_io.hpp"
#include "coiest/magnitude.hpp"
#include "coiest/sim.hpp"

namespace coiest {

enum class OutputFormat { kJson, kCsv };
enum class RocofSource { kFit, kNerc };

struct RunConfig {
  std::string input_path;
  std::optional<std::string> inertia_path;
  double omega = 30.0;
  double window_seconds = 1.0;
  double rate_fps = 10.0;
  double rocof_threshold = 0.005;
  std::size_t confirm_samples = 3;
  std::optional<double> t0;
  std::optional<double> f0;
  double f_nominal_hz = 60.0;
  RocofSource rocof_source = RocofSource::kFit;
  GapPolicy gap_policy;
  std::optional<std::string> output_path;
  OutputFormat output_format = OutputFormat::kJson;

  void validate() const;
  DetectorConfig detector() const;
  SolverConfig solver() const;
  Json to_json() const;
};

/// Everything one estimation run produces, before serialization.
struct EstimateRun {
  AlignResult aligned;
  QualityReport quality;
  EventWindow window;
  bool window_from_detector = true;
  ProposedResult proposed;
  CoiEstimate median;
  std::optional<EventMagnitude> magnitude;
};

EstimateRun run_estimate(const std::vector<ChannelSeries>& channels, const RunConfig& cfg,
                         const std::optional<InertiaTable>& inertia);

Json estimate_report(const EstimateRun& run, const RunConfig& cfg);

/// Plot-ready CSV: `t,<channel ids>,f_coi_proposed,f_coi_median`.
void emit_plot_csv(const EstimateRun& run, std::ostream& out);

/// Reads inputs named in cfg, writes the report (and plot CSV) and returns
/// the JSON report. Errors propagate as coiest::Error.
Json cmd_estimate(const RunConfig& cfg);

struct SimulateOutputs {
  std::string measurements_path;
  std::string truth_path;
  std::string scenario_path;
};

/// `scenario` is a preset name or a path to a scenario JSON file.
sim::Scenario resolve_scenario(const std::string& scenario);
SimulateOutputs cmd_simulate(const std::string& scenario, const std::string& out_prefix,
                             std::optional<std::uint64_t> seed = std::nullopt);

/// Ground truth written next to simulated measurements.
struct Truth {
  std::vector<double> timestamps;
  std::vector<double> true_coi;
  double true_rocof_initial = 0.0;
  double delta_p_mw = 0.0;
  double i_sys_mws = 0.0;
  double f_nominal_hz = 60.0;
  double trip_time = 0.0;
};

void emit_truth_csv(const sim::SimResult& result, std::ostream& out);
Truth parse_truth_csv(std::istream& in);

/// Per-method error against the oracle over the fit window.
struct MethodScore {
  std::string method;
  double coi_rmse_hz = 0.0;
  double rocof_hz_s = 0.0;
  double rocof_error_hz_s = 0.0;
  double p_event_mw = 0.0;
  double mw_error = 0.0;
};

struct Comparison {
  EstimateRun run;
  MethodScore proposed;
  MethodScore median;
};

Comparison run_compare(const std::vector<ChannelSeries>& channels, const Truth& truth, const RunConfig& cfg);
Json comparison_report(const Comparison& cmp, const Truth& truth, const RunConfig& cfg);
Json cmd_compare(const std::string& measurements_path, const std::string& truth_path, const RunConfig& cfg);

/// `{"error": {"code", "module", "message"}}`.
Json error_json(const std::string& code, const std::string& module, const std::string& message);

}  // namespace coiest
