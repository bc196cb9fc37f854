// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
// Usage: acceptance <path-to-coiest-cli>

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Cholesky>

#include "coiest/pipeline.hpp"
#include "oracle.hpp"

using namespace coiest;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

int g_failures = 0;

void run_criterion(int id, const std::string& title, double time_limit_s, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (time_limit_s > 0.0 && elapsed >= time_limit_s) {
    out.pass = false;
    out.detail += "; over time limit";
  }
  if (!out.pass) ++g_failures;
  char timing[64];
  std::snprintf(timing, sizeof timing, "%.3f s", elapsed);
  std::cout << (out.pass ? "PASS" : "FAIL") << "  criterion " << id << " (" << title << "): " << out.detail
            << " [" << timing << "]" << std::endl;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

Eigen::MatrixXd frequency_block(std::size_t k_samples, std::size_t n,
                                const std::function<double(std::size_t, std::size_t)>& f) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(k_samples), static_cast<Eigen::Index>(n));
  for (std::size_t k = 1; k <= k_samples; ++k) {
    for (std::size_t c = 0; c < n; ++c) out(static_cast<Eigen::Index>(k - 1), static_cast<Eigen::Index>(c)) = f(k, c);
  }
  return out;
}

Eigen::VectorXd stacked(const WeightSolution& s) {
  Eigen::VectorXd x(s.weights.size() + 2);
  x << s.weights, s.delta_f, s.f0_fit;
  return x;
}

MeasurementSet identical_channels(std::size_t n, const std::vector<double>& series, double dt, double t0) {
  MeasurementSet s;
  s.t0_epoch = t0;
  s.dt = dt;
  s.frame.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(series.size()));
  for (std::size_t c = 0; c < n; ++c) {
    s.channel_ids.push_back("S" + std::to_string(c + 1));
    for (std::size_t m = 0; m < series.size(); ++m) {
      s.frame(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(m)) = series[m];
    }
  }
  s.masked = BoolMatrix::Constant(s.frame.rows(), s.frame.cols(), false);
  return s;
}

Truth truth_of(const sim::SimResult& r) {
  Truth t;
  t.timestamps = r.times;
  t.true_coi = r.true_coi;
  t.true_rocof_initial = r.true_rocof_initial;
  t.delta_p_mw = r.scenario_echo.trip.delta_p_mw;
  t.i_sys_mws = r.scenario_echo.total_inertia();
  t.f_nominal_hz = r.scenario_echo.f_nominal_hz;
  t.trip_time = r.scenario_echo.start_epoch + r.scenario_echo.trip.time_s;
  return t;
}

Comparison compare_preset(const std::string& name) {
  const auto r = sim::simulate(*sim::find_preset(name));
  return run_compare(to_channels(r.measurements), truth_of(r), RunConfig{});
}

Outcome solver_correctness() {
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<int> n_dist(2, 10);
  std::uniform_real_distribution<double> slope(-0.01, -0.001);
  std::uniform_real_distribution<double> noise(-0.02, 0.02);
  std::uniform_real_distribution<double> log_scale(-6.0, -1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double omegas[] = {0.01, 1.0, 30.0, 1e4};

  double worst_normal = 0.0;
  long losses = 0;
  int instances = 0;
  int redraws = 0;
  while (instances < 100) {
    const auto n = static_cast<std::size_t>(n_dist(rng));
    std::uniform_int_distribution<int> k_dist(static_cast<int>(n) + 2, 50);
    const auto k = static_cast<std::size_t>(k_dist(rng));
    const double omega = omegas[instances % 4];
    const double df = slope(rng);
    const auto sys = build_system(frequency_block(k, n, [&](auto kk, auto) { return 60.0 + df * kk + noise(rng); }), omega);
    const auto sol = solve_weights(sys);
    if (sol.condition_estimate > 1e8) {
      ++redraws;
      continue;
    }
    ++instances;
    const auto a = oracle::to_matrix(sys.a);
    const auto b = oracle::to_vector(sys.b);
    const Eigen::VectorXd x = stacked(sol);
    const auto xl = oracle::to_vector(x);
    worst_normal = std::max(worst_normal, static_cast<double>(oracle::normal_equation_residual(a, xl, b)));
    const long double best = oracle::residual_norm(a, xl, b);
    for (int p = 0; p < 1000; ++p) {
      const double scale = std::pow(10.0, log_scale(rng));
      auto y = xl;
      for (auto& v : y) v += scale * gauss(rng);
      if (!(oracle::residual_norm(a, y, b) > best)) ++losses;
    }
  }
  Outcome out;
  out.pass = worst_normal < 1e-8 && losses == 0;
  out.detail = "100 instances, worst normal-equation residual " + fmt(worst_normal) + " (limit 1e-8), " +
               std::to_string(losses) + " of 100000 perturbations matched or beat the solution, " +
               std::to_string(redraws) + " redraws";
  return out;
}

Outcome exact_recovery() {
  const std::size_t k = 40;
  const std::size_t n = 4;
  Eigen::VectorXd target(4);
  target << 0.4, 0.3, 0.2, 0.1;
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g(0.0, 0.03);
  Eigen::MatrixXd osc(k, n);
  for (Eigen::Index r = 0; r < osc.rows(); ++r) {
    for (Eigen::Index c = 0; c < osc.cols(); ++c) osc(r, c) = g(rng);
  }
  // Oscillations cancelled by the target weights and orthogonal to the line {1, k}.
  osc -= (osc * target) * target.transpose() / target.squaredNorm();
  Eigen::MatrixXd basis(k, 2);
  for (Eigen::Index r = 0; r < basis.rows(); ++r) basis.row(r) << 1.0, static_cast<double>(r + 1);
  const Eigen::MatrixXd gram = basis.transpose() * basis;
  osc -= basis * gram.ldlt().solve(basis.transpose() * osc);

  const double f0 = 59.98;
  const double df = -0.0042;
  const auto frequencies = frequency_block(k, n, [&](auto kk, auto c) {
    return f0 + static_cast<double>(kk) * df + osc(static_cast<Eigen::Index>(kk - 1), static_cast<Eigen::Index>(c));
  });
  double worst_df = 0.0, worst_f0 = 0.0, worst_raw_f0 = 0.0;
  for (double omega : {0.01, 1.0, 30.0, 1e4}) {
    const auto sol = solve_weights(build_system(frequencies, omega));
    worst_df = std::max(worst_df, std::abs(sol.coi_delta_f() - df));
    worst_f0 = std::max(worst_f0, std::abs(sol.coi_f0() - f0));
    worst_raw_f0 = std::max(worst_raw_f0, std::abs(sol.f0_fit - f0));
  }
  const auto small = solve_weights(build_system(frequencies, 0.01));
  const double weight_err = (small.normalized_weights() - target).cwiseAbs().maxCoeff();
  Outcome out;
  out.pass = worst_df < 1e-10 && worst_f0 < 1e-10 && weight_err < 1e-3;
  out.detail = "normalized COI step error " + fmt(worst_df) + ", F0 error " + fmt(worst_f0) +
               " (limit 1e-10), weight error at omega=0.01 " + fmt(weight_err) + " (limit 1e-3); unnormalized F0 error " +
               fmt(worst_raw_f0);
  return out;
}

Outcome omega_limit() {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> noise(-0.02, 0.02);
  const std::size_t n = 6;
  const auto frequencies = frequency_block(20, n, [&](auto k, auto) { return 60.0 - 0.004 * k + noise(rng); });
  const auto pinned = solve_weights(build_system(frequencies, 1e6));
  const double pin_err = (pinned.weights.array() - 1.0 / static_cast<double>(n)).abs().maxCoeff();
  bool monotone = true;
  double previous = std::numeric_limits<double>::infinity();
  std::string gaps;
  for (double omega : {0.01, 1.0, 30.0, 1e3, 1e6}) {
    const double gap = std::abs(solve_weights(build_system(frequencies, omega)).weight_sum - 1.0);
    if (gap > previous) monotone = false;
    previous = gap;
    gaps += (gaps.empty() ? "" : ", ") + fmt(gap);
  }
  Outcome out;
  out.pass = pin_err < 1e-3 && monotone;
  out.detail = "max |x_i - 1/N| at omega=1e6 " + fmt(pin_err) + " (limit 1e-3), |sum x - 1| = [" + gaps + "]" +
               (monotone ? " non-increasing" : " NOT monotone");
  return out;
}

Outcome coi_tracking() {
  const auto edge = compare_preset("edge_trip");
  const auto central = compare_preset("central_trip");
  const double edge_ratio = edge.proposed.coi_rmse_hz / edge.median.coi_rmse_hz;
  const double central_ratio = central.proposed.coi_rmse_hz / central.median.coi_rmse_hz;
  Outcome out;
  out.pass = edge_ratio <= 0.75 && central_ratio <= 2.0 && central_ratio >= 0.5;
  out.detail = "edge_trip RMSE proposed/median " + fmt(edge.proposed.coi_rmse_hz) + "/" +
               fmt(edge.median.coi_rmse_hz) + " = " + fmt(edge_ratio) + " (limit 0.75); central_trip ratio " +
               fmt(central_ratio) + " (limit [0.5, 2])";
  return out;
}

Outcome mw_recovery() {
  Outcome out;
  for (const char* name : {"edge_trip", "central_trip"}) {
    const auto scenario = *sim::find_preset(name);
    const auto r = sim::simulate(scenario);
    const auto run = run_estimate(to_channels(r.measurements), RunConfig{}, scenario.inertia_table());
    const double p = run.magnitude->p_event_mw;
    const double rel = std::abs(p / scenario.trip.delta_p_mw - 1.0);
    if (rel > 0.05) out.pass = false;
    out.detail += (out.detail.empty() ? "" : "; ") + std::string(name) + " " + fmt(p) + " MW vs " +
                  fmt(scenario.trip.delta_p_mw) + " MW (" + fmt(100.0 * rel) + "%, limit 5%)";
  }
  return out;
}

Outcome nerc_rocof() {
  Outcome out;
  double worst_nerc = 0.0, worst_fit = 0.0;
  for (double dt : {0.1, 0.05, 1.0 / 30.0}) {
    for (double s : {0.01, 0.0375, 0.2}) {
      const std::size_t samples = static_cast<std::size_t>(std::llround(4.0 / dt));
      const std::size_t onset = samples / 4;
      std::vector<double> series(samples);
      for (std::size_t m = 0; m < samples; ++m) {
        series[m] = m <= onset ? 60.0 : 60.0 - s * dt * static_cast<double>(m - onset);
      }
      const auto set = identical_channels(5, series, dt, 1.7e9);
      const auto window = manual_window(set.time_at(onset), 60.0, window_samples(1.0, dt), set);
      const auto proposed = estimate_proposed(set, window, SolverConfig{});
      worst_nerc = std::max(worst_nerc, std::abs(proposed.estimate.rocof_nerc - s) / s);
      worst_fit = std::max(worst_fit, std::abs(proposed.estimate.rocof_fit + s) / s);
    }
  }
  // Half a second spans a difference of two ~60 Hz values: a few ulps of 60 over 0.5 s.
  const double nerc_tol = 16.0 * std::numeric_limits<double>::epsilon() * 60.0 / 0.5 / 0.01;
  std::string scenarios;
  bool signs = true;
  for (const auto& scenario : sim::scenario_presets()) {
    const auto r = sim::simulate(scenario);
    const auto run = run_estimate(to_channels(r.measurements), RunConfig{}, std::nullopt);
    for (const CoiEstimate* e : {&run.proposed.estimate, &run.median}) {
      const bool ok = r.true_rocof_initial < 0.0 && e->rocof_fit < 0.0 && e->rocof_nerc > 0.0;
      signs = signs && ok;
    }
    scenarios += (scenarios.empty() ? "" : ", ") + scenario.name;
  }
  out.pass = worst_nerc <= nerc_tol && worst_fit < 1e-9 && signs;
  out.detail = "linear decline: worst relative nerc error " + fmt(worst_nerc) + " (limit " + fmt(nerc_tol) +
               "), fit error " + fmt(worst_fit) + " (limit 1e-9); decline gives fit < 0 < nerc on " + scenarios +
               (signs ? "" : " (VIOLATED)");
  return out;
}

Outcome simulator_physics() {
  Outcome out;
  sim::Scenario single;
  single.name = "single";
  single.machines = {{5.0, 1000.0, 0.0}};
  single.coupling = Eigen::MatrixXd::Zero(1, 1);
  single.trip.machine_index = 0;
  single.trip.delta_p_mw = 100.0;
  single.trip.time_s = 1.0;
  single.duration_s = 3.0;
  single.sensor_map.sensors = {{"S1", 0, std::nullopt, 0.0}};
  const auto r1 = sim::simulate(single);
  const double expected1 = -100.0 * 60.0 / (2.0 * 5.0 * 1000.0);
  const std::size_t k1 = r1.trip_sample;
  const double slope1 = (r1.true_coi[k1 + 1] - r1.true_coi[k1]) / r1.measurements.dt;
  const double err1 = std::abs(slope1 / expected1 - 1.0);
  out.detail = "single machine slope error " + fmt(100.0 * err1) + "% (limit 1%)";
  out.pass = err1 < 0.01;

  double worst_multi = 0.0;
  bool deterministic = true;
  for (const auto& scenario : sim::scenario_presets()) {
    const auto a = sim::simulate(scenario);
    const auto b = sim::simulate(scenario);
    deterministic = deterministic && a.rotor_speeds == b.rotor_speeds && a.measurements.frame == b.measurements.frame &&
                    a.true_coi == b.true_coi;
    const double expected = -scenario.trip.delta_p_mw * scenario.f_nominal_hz / (2.0 * scenario.total_inertia());
    const std::size_t k = a.trip_sample;
    const double slope = (a.true_coi[k + 1] - a.true_coi[k]) / a.measurements.dt;
    worst_multi = std::max(worst_multi, std::abs(slope / expected - 1.0));
  }
  out.pass = out.pass && worst_multi < 0.02 && deterministic;
  out.detail += "; worst multi-machine COI slope error " + fmt(100.0 * worst_multi) + "% (limit 2%); repeated runs " +
                (deterministic ? "bit-identical" : "DIFFER");
  return out;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(const std::string& cli, const std::string& args, const fs::path& log) {
  const std::string cmd = "\"" + cli + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome pipeline_round_trip(const std::string& cli) {
  Outcome out;
  if (cli.empty()) return {false, "no CLI path given"};
  const fs::path dir = fs::temp_directory_path() / ("coiest_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::vector<std::string> failures;
  int runs = 0;
  for (const auto& scenario : sim::scenario_presets()) {
    const fs::path prefix = dir / scenario.name;
    const fs::path inertia = dir / (scenario.name + "_inertia.csv");
    {
      std::ofstream f(inertia);
      emit_inertia_csv(scenario.inertia_table(), f);
    }
    const fs::path log = dir / "cli.log";
    const std::vector<std::string> steps = {
        "simulate --scenario " + scenario.name + " --out-prefix \"" + prefix.string() + "\"",
        "estimate --input \"" + prefix.string() + "_measurements.csv\" --inertia \"" + inertia.string() +
            "\" --out \"" + prefix.string() + "_report.json\"",
        "compare --measurements \"" + prefix.string() + "_measurements.csv\" --truth \"" + prefix.string() +
            "_truth.csv\" --out \"" + prefix.string() + "_compare.json\""};
    const std::vector<std::string> artifacts = {"_measurements.csv", "_truth.csv", "_scenario.json",
                                                "_report.json",      "_report_plot.csv", "_compare.json"};
    std::vector<std::string> first;
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& step : steps) {
        ++runs;
        const int code = run_cli(cli, step, log);
        if (code != 0) failures.push_back(scenario.name + ": exit " + std::to_string(code) + " for " + step.substr(0, step.find(' ')));
      }
      for (std::size_t i = 0; i < artifacts.size(); ++i) {
        const std::string text = slurp(prefix.string() + artifacts[i]);
        if (pass == 0) {
          if (text.empty()) failures.push_back(scenario.name + artifacts[i] + " missing");
          first.push_back(text);
        } else if (text != first[i]) {
          failures.push_back(scenario.name + artifacts[i] + " differs between runs");
        }
      }
    }
  }
  fs::remove_all(dir);
  out.pass = failures.empty();
  out.detail = std::to_string(runs) + " CLI runs over all presets, all outputs compared byte-for-byte";
  for (const auto& f : failures) out.detail += "; " + f;
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  run_criterion(1, "solver correctness", 5.0, solver_correctness);
  run_criterion(2, "exact-model recovery", 1.0, exact_recovery);
  run_criterion(3, "omega limit", 1.0, omega_limit);
  run_criterion(4, "oracle COI tracking", 10.0, coi_tracking);
  run_criterion(5, "MW imbalance recovery", 10.0, mw_recovery);
  run_criterion(6, "NERC RoCoF", 0.0, nerc_rocof);
  run_criterion(7, "simulator physics", 0.0, simulator_physics);
  run_criterion(8, "pipeline determinism and round-trip", 0.0, [&] { return pipeline_round_trip(cli); });
  std::cout << (g_failures == 0 ? "all criteria passed" : std::to_string(g_failures) + " criteria failed") << std::endl;
  return g_failures == 0 ? 0 : 1;
}
