#include "coiest/pipeline.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "text_util.hpp"

namespace coiest {
namespace {

constexpr const char* kModule = "report_cli";

[[noreturn]] void usage_error(const std::string& msg) { throw Error(ErrorKind::kUsage, "usage", kModule, msg); }

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) usage_error("cannot open input file '" + path + "'");
  return in;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) usage_error("cannot write output file '" + path + "'");
  out << text;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

// Sibling path with a suffix replacing the extension: out/report.json -> out/report_plot.csv.
std::string sibling(const std::string& path, const std::string& suffix) {
  std::filesystem::path p(path);
  return (p.parent_path() / (p.stem().string() + suffix)).string();
}

// Tie tolerances used when naming a winner per metric.
constexpr double kTieRmseHz = 1e-6;
constexpr double kTieRocof = 1e-6;
constexpr double kTieMw = 1e-3;

std::string winner(double proposed_err, double median_err, double tie) {
  if (std::abs(proposed_err - median_err) <= tie) return "tie";
  return proposed_err < median_err ? "proposed" : "median";
}

Json score_json(const MethodScore& s) {
  return {{"method", s.method},
          {"coi_rmse_hz", s.coi_rmse_hz},
          {"rocof_hz_s", s.rocof_hz_s},
          {"rocof_error_hz_s", s.rocof_error_hz_s},
          {"p_event_mw", s.p_event_mw},
          {"mw_error", s.mw_error}};
}

}  // namespace

void RunConfig::validate() const {
  if (!(omega > 0.0)) usage_error("omega must be positive");
  if (!(window_seconds > 0.0)) usage_error("window_seconds must be positive");
  if (!(rate_fps > 0.0)) usage_error("rate_fps must be positive");
  if (!(f_nominal_hz > 0.0)) usage_error("f_nominal must be positive");
  if (t0.has_value() != f0.has_value()) usage_error("--t0 and --f0 must be given together");
}

DetectorConfig RunConfig::detector() const { return {rocof_threshold, confirm_samples, window_seconds}; }

SolverConfig RunConfig::solver() const {
  SolverConfig s;
  s.omega = omega;
  return s;
}

Json RunConfig::to_json() const {
  Json j;
  j["input_path"] = input_path;
  j["inertia_path"] = inertia_path ? Json(*inertia_path) : Json(nullptr);
  j["omega"] = omega;
  j["window_seconds"] = window_seconds;
  j["rate_fps"] = rate_fps;
  j["dt"] = 1.0 / rate_fps;
  j["detector"] = coiest::to_json(detector());
  j["t0"] = t0 ? Json(*t0) : Json(nullptr);
  j["f0"] = f0 ? Json(*f0) : Json(nullptr);
  j["f_nominal_hz"] = f_nominal_hz;
  j["rocof_source"] = rocof_source == RocofSource::kFit ? "fit" : "nerc";
  j["min_condition_warn"] = solver().min_condition_warn;
  j["gap_policy"] = {{"interpolate_max_gap", gap_policy.interpolate_max_gap},
                     {"drop_channel_threshold", gap_policy.drop_channel_threshold}};
  j["output_path"] = output_path ? Json(*output_path) : Json(nullptr);
  j["output_format"] = output_format == OutputFormat::kJson ? "json" : "csv";
  return j;
}

EstimateRun run_estimate(const std::vector<ChannelSeries>& channels, const RunConfig& cfg,
                         const std::optional<InertiaTable>& inertia) {
  cfg.validate();
  EstimateRun run;
  const double dt = 1.0 / cfg.rate_fps;
  run.aligned = align(channels, dt, cfg.gap_policy);
  const MeasurementSet& set = run.aligned.set;
  run.quality = quality_report(set);

  if (cfg.t0) {
    run.window = manual_window(*cfg.t0, *cfg.f0, window_samples(cfg.window_seconds, dt), set);
    run.window_from_detector = false;
  } else {
    run.window = detect_event(set, cfg.detector());
  }

  run.proposed = estimate_proposed(set, run.window, cfg.solver());
  run.median = median_baseline(set, run.window);

  if (inertia) {
    const double i_sys = system_inertia(*inertia);
    const double rocof = cfg.rocof_source == RocofSource::kFit ? std::abs(run.proposed.estimate.rocof_fit)
                                                               : std::abs(run.proposed.estimate.rocof_nerc);
    run.magnitude = estimate_event_mw(i_sys, rocof, cfg.f_nominal_hz);
  }
  return run;
}

Json estimate_report(const EstimateRun& run, const RunConfig& cfg) {
  Json j;
  j["config"] = cfg.to_json();
  j["quality"] = to_json(run.quality);
  j["alignment"] = {{"t0_epoch", run.aligned.set.t0_epoch},
                    {"dt", run.aligned.set.dt},
                    {"samples", run.aligned.set.samples()},
                    {"channels", run.aligned.set.channel_ids},
                    {"dropped_channels", run.aligned.dropped_channels},
                    {"filled_cells", run.aligned.filled_cells}};
  Json window = to_json(run.window);
  window["source"] = run.window_from_detector ? "detector" : "manual";
  j["event_window"] = window;
  j["weight_solution"] = to_json(run.proposed.solution);
  Json proposed = to_json(run.proposed.estimate);
  j["proposed"] = proposed;
  j["median"] = to_json(run.median);
  j["rocof_sign_convention"] =
      "rocof_fit is signed df/dt (negative on decline); rocof_nerc is (f(t0) - f(t0+0.5s))/0.5 (positive on decline)";
  j["nerc_lookup_times"] = {run.proposed.estimate.nerc_t_start, run.proposed.estimate.nerc_t_end};
  if (run.magnitude) {
    j["magnitude"] = to_json(*run.magnitude);
  } else {
    j["magnitude"] = "skipped";
  }
  return j;
}

void emit_plot_csv(const EstimateRun& run, std::ostream& out) {
  const MeasurementSet& set = run.aligned.set;
  out << "t";
  for (const auto& id : set.channel_ids) out << ',' << id;
  out << ",f_coi_proposed,f_coi_median\n";
  auto field = [&out](double v) {
    out << ',';
    if (std::isfinite(v)) out << detail::format_double(v);
  };
  for (std::size_t m = 0; m < set.samples(); ++m) {
    out << detail::format_double(set.time_at(m));
    for (std::size_t n = 0; n < set.channels(); ++n) field(set.usable(n, m) ? set.value(n, m) : NAN);
    field(run.proposed.estimate.f_coi[m]);
    field(run.median.f_coi[m]);
    out << '\n';
  }
}

Json cmd_estimate(const RunConfig& cfg) {
  cfg.validate();
  auto in = open_input(cfg.input_path);
  const auto channels = parse_csv(in);
  std::optional<InertiaTable> inertia;
  if (cfg.inertia_path) {
    std::ifstream inertia_in(*cfg.inertia_path);
    // A missing inertia file skips magnitude estimation rather than failing.
    if (inertia_in) inertia = parse_inertia_csv(inertia_in);
  }
  const EstimateRun run = run_estimate(channels, cfg, inertia);
  Json report = estimate_report(run, cfg);
  if (cfg.inertia_path && !inertia) report["magnitude_note"] = "inertia file not found: " + *cfg.inertia_path;

  if (cfg.output_path) {
    std::ostringstream plot;
    emit_plot_csv(run, plot);
    if (cfg.output_format == OutputFormat::kJson) {
      write_text(*cfg.output_path, dump(report));
      write_text(sibling(*cfg.output_path, "_plot.csv"), plot.str());
    } else {
      write_text(*cfg.output_path, plot.str());
      write_text(sibling(*cfg.output_path, "_report.json"), dump(report));
    }
  }
  return report;
}

sim::Scenario resolve_scenario(const std::string& scenario) {
  if (auto preset = sim::find_preset(scenario)) return *preset;
  std::ifstream in(scenario);
  if (!in) usage_error("'" + scenario + "' is neither a preset name nor a readable scenario file");
  std::stringstream text;
  text << in.rdbuf();
  return scenario_from_json_text(text.str());
}

void emit_truth_csv(const sim::SimResult& result, std::ostream& out) {
  const auto& s = result.scenario_echo;
  out << "# scenario=" << s.name << '\n';
  out << "# delta_p_mw=" << detail::format_double(s.trip.delta_p_mw) << '\n';
  out << "# true_rocof_initial=" << detail::format_double(result.true_rocof_initial) << '\n';
  out << "# i_sys_mws=" << detail::format_double(s.total_inertia()) << '\n';
  out << "# f_nominal_hz=" << detail::format_double(s.f_nominal_hz) << '\n';
  out << "# trip_time=" << detail::format_double(s.start_epoch + s.trip.time_s) << '\n';
  out << "timestamp,true_coi\n";
  for (std::size_t m = 0; m < result.times.size(); ++m) {
    out << detail::format_double(result.times[m]) << ',' << detail::format_double(result.true_coi[m]) << '\n';
  }
}

Truth parse_truth_csv(std::istream& in) {
  std::map<std::string, double> meta;
  std::ostringstream body;
  std::string line;
  while (std::getline(in, line)) {
    const std::string_view view = detail::trim(line);
    if (!view.empty() && view.front() == '#') {
      const auto eq = view.find('=');
      if (eq != std::string_view::npos) {
        const auto key = detail::trim(view.substr(1, eq - 1));
        if (const auto v = detail::parse_double(detail::trim(view.substr(eq + 1)))) meta[std::string(key)] = *v;
      }
      continue;
    }
    body << line << '\n';
  }
  std::istringstream data(body.str());
  const auto series = parse_csv(data);
  if (series.size() != 1 || series.front().channel_id != "true_coi") {
    throw Error(ErrorKind::kData, "format", kModule, "truth file must have columns timestamp,true_coi");
  }
  for (const char* key : {"delta_p_mw", "true_rocof_initial", "i_sys_mws", "f_nominal_hz", "trip_time"}) {
    if (!meta.count(key)) throw Error(ErrorKind::kData, "format", kModule, std::string("truth file lacks '# ") + key + "='");
  }
  Truth t;
  t.timestamps = series.front().timestamps;
  t.true_coi = series.front().values;
  t.delta_p_mw = meta["delta_p_mw"];
  t.true_rocof_initial = meta["true_rocof_initial"];
  t.i_sys_mws = meta["i_sys_mws"];
  t.f_nominal_hz = meta["f_nominal_hz"];
  t.trip_time = meta["trip_time"];
  return t;
}

SimulateOutputs cmd_simulate(const std::string& scenario, const std::string& out_prefix,
                             std::optional<std::uint64_t> seed) {
  sim::Scenario s = resolve_scenario(scenario);
  if (seed) s.seed = *seed;
  const sim::SimResult result = sim::simulate(s);

  SimulateOutputs out{out_prefix + "_measurements.csv", out_prefix + "_truth.csv", out_prefix + "_scenario.json"};
  std::ostringstream meas;
  emit_csv(result.measurements, meas);
  write_text(out.measurements_path, meas.str());
  std::ostringstream truth;
  emit_truth_csv(result, truth);
  write_text(out.truth_path, truth.str());
  write_text(out.scenario_path, dump(scenario_to_json(result.scenario_echo)));
  return out;
}

Comparison run_compare(const std::vector<ChannelSeries>& channels, const Truth& truth, const RunConfig& cfg) {
  Comparison cmp;
  cmp.run = run_estimate(channels, cfg, std::nullopt);
  const MeasurementSet& set = cmp.run.aligned.set;
  const EventWindow& w = cmp.run.window;
  if (truth.timestamps.size() < 2) {
    throw Error(ErrorKind::kData, "alignment", kModule, "truth series is too short");
  }

  // Truth index for each fit-window sample, requiring identical timestamps.
  const double truth_dt = truth.timestamps[1] - truth.timestamps[0];
  auto truth_at = [&](std::size_t m) {
    const double t = set.time_at(m);
    const double pos = std::round((t - truth.timestamps.front()) / truth_dt);
    if (pos < 0.0 || pos >= static_cast<double>(truth.timestamps.size())) {
      throw Error(ErrorKind::kData, "alignment", kModule, "fit window lies outside the truth series");
    }
    const auto idx = static_cast<std::size_t>(pos);
    if (std::abs(truth.timestamps[idx] - t) > 1e-6 * set.dt) {
      throw Error(ErrorKind::kData, "alignment", kModule, "truth timestamps do not match the measurement grid");
    }
    return truth.true_coi[idx];
  };

  auto score = [&](const CoiEstimate& est) {
    MethodScore s;
    s.method = to_string(est.method);
    double sum_sq = 0.0;
    for (std::size_t k = 1; k <= w.k_samples; ++k) {
      const std::size_t m = w.start_index + k;
      const double e = est.f_coi[m] - truth_at(m);
      sum_sq += e * e;
    }
    s.coi_rmse_hz = std::sqrt(sum_sq / static_cast<double>(w.k_samples));
    s.rocof_hz_s = est.rocof_fit;
    s.rocof_error_hz_s = std::abs(est.rocof_fit - truth.true_rocof_initial);
    s.p_event_mw = estimate_event_mw(truth.i_sys_mws, std::abs(est.rocof_fit), truth.f_nominal_hz).p_event_mw;
    s.mw_error = std::abs(s.p_event_mw - truth.delta_p_mw);
    return s;
  };
  cmp.proposed = score(cmp.run.proposed.estimate);
  cmp.median = score(cmp.run.median);
  return cmp;
}

Json comparison_report(const Comparison& cmp, const Truth& truth, const RunConfig& cfg) {
  Json j;
  j["config"] = cfg.to_json();
  j["truth"] = {{"delta_p_mw", truth.delta_p_mw},
                {"true_rocof_initial", truth.true_rocof_initial},
                {"i_sys_mws", truth.i_sys_mws},
                {"f_nominal_hz", truth.f_nominal_hz},
                {"trip_time", truth.trip_time}};
  Json window = to_json(cmp.run.window);
  window["source"] = cmp.run.window_from_detector ? "detector" : "manual";
  j["event_window"] = window;
  j["weight_solution"] = to_json(cmp.run.proposed.solution);
  j["methods"] = Json::array({score_json(cmp.proposed), score_json(cmp.median)});
  j["summary"] = {{"coi_rmse", winner(cmp.proposed.coi_rmse_hz, cmp.median.coi_rmse_hz, kTieRmseHz)},
                  {"rocof_error", winner(cmp.proposed.rocof_error_hz_s, cmp.median.rocof_error_hz_s, kTieRocof)},
                  {"mw_error", winner(cmp.proposed.mw_error, cmp.median.mw_error, kTieMw)}};
  return j;
}

Json cmd_compare(const std::string& measurements_path, const std::string& truth_path, const RunConfig& cfg) {
  cfg.validate();
  if (truth_path.empty()) usage_error("compare requires a truth file");
  std::ifstream truth_in(truth_path);
  if (!truth_in) usage_error("cannot open truth file '" + truth_path + "'");
  const Truth truth = parse_truth_csv(truth_in);
  auto in = open_input(measurements_path);
  const auto channels = parse_csv(in);
  const Comparison cmp = run_compare(channels, truth, cfg);
  Json report = comparison_report(cmp, truth, cfg);
  if (cfg.output_path) write_text(*cfg.output_path, dump(report));
  return report;
}

Json error_json(const std::string& code, const std::string& module, const std::string& message) {
  return {{"error", {{"code", code}, {"module", module}, {"message", message}}}};
}

}  // namespace coiest
