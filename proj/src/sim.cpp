#include "coiest/sim.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "coiest/error.hpp"

namespace coiest::sim {
namespace {

constexpr const char* kModule = "sim_oracle";
constexpr double kMaxDeviationHz = 5.0;

[[noreturn]] void invalid(const std::string& msg) {
  throw Error(ErrorKind::kData, "validation", kModule, msg);
}

std::optional<std::size_t> bus_index(const Scenario& s, const std::string& name) {
  for (std::size_t i = 0; i < s.buses.size(); ++i) {
    if (s.buses[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t report_decimation(const Scenario& s) {
  return static_cast<std::size_t>(std::llround(1.0 / (s.sensor_map.rate_fps * s.dt_sim)));
}

// Machine participation vector of a sensor or trip location.
Eigen::VectorXd participation(const Scenario& s, const std::optional<std::size_t>& machine,
                              const std::optional<std::string>& bus) {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s.machines.size()));
  if (machine) {
    p(static_cast<Eigen::Index>(*machine)) = 1.0;
  } else {
    const auto& shares = s.buses[*bus_index(s, *bus)].shares;
    for (std::size_t i = 0; i < shares.size(); ++i) p(static_cast<Eigen::Index>(i)) = shares[i];
  }
  return p;
}

}  // namespace

void Scenario::validate() const {
  const std::size_t n = machines.size();
  if (n == 0) invalid("scenario has no machines");
  if (!(f_nominal_hz > 0.0)) invalid("f_nominal_hz must be positive");
  if (!(base_mva > 0.0)) invalid("base_mva must be positive");
  if (!std::isfinite(start_epoch)) invalid("start_epoch must be finite");
  for (std::size_t i = 0; i < n; ++i) {
    const auto& m = machines[i];
    if (!(m.h > 0.0) || !(m.cap > 0.0)) invalid("machine " + std::to_string(i) + ": h and cap must be positive");
    if (!(m.damping >= 0.0)) invalid("machine " + std::to_string(i) + ": damping must be non-negative");
  }

  if (coupling.rows() != static_cast<Eigen::Index>(n) || coupling.cols() != static_cast<Eigen::Index>(n)) {
    invalid("coupling must be an N x N matrix for N machines");
  }
  const double scale = std::max(1.0, coupling.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < coupling.rows(); ++i) {
    for (Eigen::Index j = 0; j < coupling.cols(); ++j) {
      if (!std::isfinite(coupling(i, j))) invalid("coupling entries must be finite");
      if (i != j && coupling(i, j) < 0.0) invalid("coupling off-diagonals must be non-negative");
      if (std::abs(coupling(i, j) - coupling(j, i)) > 1e-12 * scale) invalid("coupling must be symmetric");
    }
  }

  std::set<std::string> bus_names;
  for (const auto& b : buses) {
    if (b.name.empty() || !bus_names.insert(b.name).second) invalid("bus names must be unique and non-empty");
    if (b.shares.size() != n) invalid("bus " + b.name + ": shares must list every machine");
    double total = 0.0;
    for (double w : b.shares) {
      if (!(w >= 0.0)) invalid("bus " + b.name + ": shares must be non-negative");
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) invalid("bus " + b.name + ": shares must sum to 1");
  }

  if (trip.machine_index.has_value() == trip.load_bus.has_value()) {
    invalid("trip must name exactly one of machine_index or load_bus");
  }
  if (trip.machine_index && *trip.machine_index >= n) invalid("trip machine_index out of range");
  if (trip.load_bus && !bus_index(*this, *trip.load_bus)) invalid("trip load_bus '" + *trip.load_bus + "' not defined");
  if (!std::isfinite(trip.delta_p_mw)) invalid("trip delta_p_mw must be finite");
  if (!(trip.time_s >= 0.0)) invalid("trip time_s must be non-negative");
  if (!(duration_s > 0.0)) invalid("duration_s must be positive");
  if (!(trip.time_s < duration_s)) invalid("duration_s must extend past the trip time");

  if (!(dt_sim > 0.0)) invalid("dt_sim must be positive");
  if (!(sensor_map.rate_fps > 0.0)) invalid("sensor rate_fps must be positive");
  const double dt_report = 1.0 / sensor_map.rate_fps;
  if (dt_sim > dt_report / 5.0 * (1.0 + 1e-12)) invalid("dt_sim must be at most one fifth of the reporting interval");
  const double ratio = dt_report / dt_sim;
  if (std::abs(ratio - std::round(ratio)) > 1e-6 * ratio) {
    invalid("reporting interval must be an integer multiple of dt_sim");
  }

  if (sensor_map.sensors.empty()) invalid("sensor_map has no sensors");
  std::set<std::string> ids;
  for (const auto& s : sensor_map.sensors) {
    if (s.id.empty() || !ids.insert(s.id).second) invalid("sensor ids must be unique and non-empty");
    if (s.machine.has_value() == s.bus.has_value()) invalid("sensor " + s.id + " must observe exactly one machine or bus");
    if (s.machine && *s.machine >= n) invalid("sensor " + s.id + ": machine index out of range");
    if (s.bus && !bus_index(*this, *s.bus)) invalid("sensor " + s.id + ": bus '" + *s.bus + "' not defined");
    if (!(s.noise_std_hz >= 0.0)) invalid("sensor " + s.id + ": noise_std_hz must be non-negative");
  }
}

std::vector<double> Scenario::inertias() const {
  std::vector<double> out;
  out.reserve(machines.size());
  for (const auto& m : machines) out.push_back(m.h * m.cap);
  return out;
}

double Scenario::total_inertia() const {
  double total = 0.0;
  for (double i : inertias()) total += i;
  return total;
}

double Scenario::expected_initial_rocof() const {
  return -trip.delta_p_mw * f_nominal_hz / (2.0 * total_inertia());
}

InertiaTable Scenario::inertia_table() const {
  InertiaTable table;
  for (std::size_t i = 0; i < machines.size(); ++i) {
    table.units.push_back({"G" + std::to_string(i + 1), machines[i].h, machines[i].cap, true});
  }
  return table;
}

std::vector<double> true_coi(const Eigen::MatrixXd& rotor_speeds, const std::vector<double>& inertias) {
  if (static_cast<std::size_t>(rotor_speeds.rows()) != inertias.size()) {
    throw Error(ErrorKind::kData, "shape", kModule, "one inertia per machine required");
  }
  const Eigen::Map<const Eigen::VectorXd> inertia(inertias.data(), static_cast<Eigen::Index>(inertias.size()));
  const double total = inertia.sum();
  if (!(total > 0.0)) throw Error(ErrorKind::kData, "data", kModule, "total inertia must be positive");
  const Eigen::RowVectorXd coi = (inertia.transpose() * rotor_speeds) / total;
  return {coi.data(), coi.data() + coi.size()};
}

SimResult simulate(const Scenario& scenario) {
  scenario.validate();
  const auto n = static_cast<Eigen::Index>(scenario.machines.size());
  const double f_n = scenario.f_nominal_hz;

  Eigen::VectorXd inv_mass(n);
  Eigen::VectorXd damping(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& m = scenario.machines[static_cast<std::size_t>(i)];
    inv_mass(i) = f_n / (2.0 * m.h * m.cap);
    damping(i) = m.damping * m.cap / f_n;  // MW per Hz
  }
  Eigen::MatrixXd off = scenario.coupling;
  off.diagonal().setZero();
  // Synchronizing power in MW per rad of angle difference.
  const Eigen::MatrixXd laplacian =
      scenario.base_mva * (Eigen::MatrixXd(off.rowwise().sum().asDiagonal()) - off);

  const Eigen::VectorXd trip_dp =
      -scenario.trip.delta_p_mw * participation(scenario, scenario.trip.machine_index, scenario.trip.load_bus);

  const double h = scenario.dt_sim;
  const auto steps = static_cast<std::size_t>(std::llround(scenario.duration_s / h));
  const std::size_t decimation = report_decimation(scenario);
  const auto trip_step = static_cast<std::size_t>(std::ceil(scenario.trip.time_s / h - 1e-9));
  const std::size_t samples = steps / decimation + 1;

  // State: frequency deviations (Hz) and rotor angles (rad).
  Eigen::VectorXd df = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd angle = Eigen::VectorXd::Zero(n);
  auto accel = [&](const Eigen::VectorXd& f, const Eigen::VectorXd& d, bool tripped) -> Eigen::VectorXd {
    Eigen::VectorXd p = -damping.cwiseProduct(f) - laplacian * d;
    if (tripped) p += trip_dp;
    return inv_mass.cwiseProduct(p);
  };

  SimResult result;
  result.scenario_echo = scenario;
  result.rotor_speeds.resize(n, static_cast<Eigen::Index>(samples));
  std::size_t sample = 0;
  result.rotor_speeds.col(0) = df.array() + f_n;

  const double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t s = 0; s < steps; ++s) {
    const bool tripped = s >= trip_step;
    const Eigen::VectorXd k1f = accel(df, angle, tripped);
    const Eigen::VectorXd k1d = two_pi * df;
    const Eigen::VectorXd f2 = df + 0.5 * h * k1f;
    const Eigen::VectorXd k2f = accel(f2, angle + 0.5 * h * k1d, tripped);
    const Eigen::VectorXd k2d = two_pi * f2;
    const Eigen::VectorXd f3 = df + 0.5 * h * k2f;
    const Eigen::VectorXd k3f = accel(f3, angle + 0.5 * h * k2d, tripped);
    const Eigen::VectorXd k3d = two_pi * f3;
    const Eigen::VectorXd f4 = df + h * k3f;
    const Eigen::VectorXd k4f = accel(f4, angle + h * k3d, tripped);
    const Eigen::VectorXd k4d = two_pi * f4;
    df += h / 6.0 * (k1f + 2.0 * k2f + 2.0 * k3f + k4f);
    angle += h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);

    if (!df.allFinite() || df.cwiseAbs().maxCoeff() > kMaxDeviationHz) {
      throw Error(ErrorKind::kInstability, "instability", kModule,
                  "frequency deviation exceeded 5 Hz at integration step " + std::to_string(s + 1) +
                      " (t = " + std::to_string(static_cast<double>(s + 1) * h) + " s)");
    }
    if ((s + 1) % decimation == 0) {
      result.rotor_speeds.col(static_cast<Eigen::Index>(++sample)) = df.array() + f_n;
    }
  }

  const double dt_report = 1.0 / scenario.sensor_map.rate_fps;
  result.times.reserve(samples);
  for (std::size_t m = 0; m < samples; ++m) {
    result.times.push_back(scenario.start_epoch + static_cast<double>(m) * dt_report);
  }
  result.true_coi = true_coi(result.rotor_speeds, scenario.inertias());
  result.true_rocof_initial = scenario.expected_initial_rocof();
  result.trip_sample = static_cast<std::size_t>(std::floor(scenario.trip.time_s / dt_report + 1e-9));

  const auto& sensors = scenario.sensor_map.sensors;
  const auto n_sensors = static_cast<Eigen::Index>(sensors.size());
  Eigen::MatrixXd observe(n_sensors, n);
  for (Eigen::Index i = 0; i < n_sensors; ++i) {
    const auto& s = sensors[static_cast<std::size_t>(i)];
    observe.row(i) = participation(scenario, s.machine, s.bus).transpose();
  }
  result.sensor_clean = observe * result.rotor_speeds;

  std::mt19937_64 rng(scenario.seed);
  std::normal_distribution<double> unit_normal(0.0, 1.0);
  MeasurementSet& ms = result.measurements;
  ms.t0_epoch = scenario.start_epoch;
  ms.dt = dt_report;
  ms.frame = result.sensor_clean;
  ms.masked = BoolMatrix::Constant(n_sensors, static_cast<Eigen::Index>(samples), false);
  for (Eigen::Index m = 0; m < ms.frame.cols(); ++m) {
    for (Eigen::Index i = 0; i < n_sensors; ++i) {
      const double std_hz = sensors[static_cast<std::size_t>(i)].noise_std_hz;
      const double z = unit_normal(rng);
      if (std_hz > 0.0) ms.frame(i, m) += std_hz * z;
    }
  }
  for (const auto& s : sensors) ms.channel_ids.push_back(s.id);
  return result;
}

namespace {

Eigen::MatrixXd chain_coupling(std::size_t n, double k_pu) {
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i + 1 < static_cast<Eigen::Index>(n); ++i) {
    k(i, i + 1) = k_pu;
    k(i + 1, i) = k_pu;
  }
  return k;
}

SensorMap one_sensor_per_machine(std::size_t n, double noise) {
  SensorMap map;
  for (std::size_t i = 0; i < n; ++i) {
    map.sensors.push_back({"S" + std::to_string(i + 1), i, std::nullopt, noise});
  }
  return map;
}

}  // namespace

std::vector<Scenario> scenario_presets() {
  std::vector<Scenario> out;

  Scenario edge;
  edge.name = "edge_trip";
  edge.description =
      "Five machines in a loosely coupled chain (300 pu/rad on 100 MVA). 1010 MW lost at the chain end "
      "excites a visible inter-area swing. Total inertia 565000 MW*s.";
  edge.machines = {{5.0, 20000.0, 0.0}, {4.0, 30000.0, 0.0}, {5.0, 25000.0, 0.0}, {4.0, 30000.0, 0.0},
                   {5.0, 20000.0, 0.0}};
  edge.coupling = chain_coupling(5, 300.0);
  edge.trip.machine_index = 0;
  edge.trip.delta_p_mw = 1010.0;
  edge.trip.time_s = 2.0;
  edge.duration_s = 6.0;
  edge.sensor_map = one_sensor_per_machine(5, 0.0005);
  edge.seed = 7;
  out.push_back(edge);

  Scenario central;
  central.name = "central_trip";
  central.description =
      "Five machines in a stiff chain (2000 pu/rad on 100 MVA) around a large central unit. 900 MW lost "
      "at the middle machine; swings stay small. Total inertia 740000 MW*s.";
  central.machines = {{5.0, 20000.0, 0.0}, {4.0, 30000.0, 0.0}, {5.0, 60000.0, 0.0}, {4.0, 30000.0, 0.0},
                      {5.0, 20000.0, 0.0}};
  central.coupling = chain_coupling(5, 2000.0);
  central.trip.machine_index = 2;
  central.trip.delta_p_mw = 900.0;
  central.trip.time_s = 2.0;
  central.duration_s = 6.0;
  central.sensor_map = one_sensor_per_machine(5, 0.0005);
  central.seed = 11;
  out.push_back(central);

  Scenario uniform;
  uniform.name = "uniform";
  uniform.description =
      "Five identical machines; 1000 MW of load added at a bus shared equally by all of them, so every "
      "machine moves identically. Noise-free symmetry reference. Total inertia 500000 MW*s.";
  uniform.machines.assign(5, Machine{5.0, 20000.0, 0.0});
  uniform.coupling = chain_coupling(5, 200.0);
  uniform.buses.push_back({"system", std::vector<double>(5, 0.2)});
  uniform.trip.load_bus = "system";
  uniform.trip.delta_p_mw = 1000.0;
  uniform.trip.time_s = 2.0;
  uniform.duration_s = 6.0;
  uniform.sensor_map = one_sensor_per_machine(5, 0.0);
  uniform.seed = 3;
  out.push_back(uniform);

  return out;
}

std::optional<Scenario> find_preset(const std::string& name) {
  for (auto& s : scenario_presets()) {
    if (s.name == name) return s;
  }
  return std::nullopt;
}

}  // namespace coiest::sim
