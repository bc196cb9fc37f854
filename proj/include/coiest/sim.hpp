#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "coiest/ingest.hpp"
#include "coiest/magnitude.hpp"

namespace coiest::sim {

struct Machine {
  double h = 5.0;        // inertia constant, s
  double cap = 1000.0;   // MVA
  double damping = 0.0;  // per unit power per per-unit frequency, machine base
};

/// A load bus tied to the machines by fixed participation shares. Its
/// frequency is the share-weighted machine frequency; load lost or added
/// there is distributed to the machines by the same shares.
struct Bus {
  std::string name;
  std::vector<double> shares;
};

struct Trip {
  std::optional<std::size_t> machine_index;
  std::optional<std::string> load_bus;
  double delta_p_mw = 0.0;  // generation lost; negative for a load trip
  double time_s = 0.0;      // seconds after simulation start
};

struct Sensor {
  std::string id;
  std::optional<std::size_t> machine;
  std::optional<std::string> bus;
  double noise_std_hz = 0.0005;
};

struct SensorMap {
  double rate_fps = 10.0;
  std::vector<Sensor> sensors;
};

struct Scenario {
  std::string name;
  std::string description;
  double f_nominal_hz = 60.0;
  double base_mva = 100.0;  // base of the per-unit coupling coefficients
  double start_epoch = 1.6e9;
  std::vector<Machine> machines;
  Eigen::MatrixXd coupling;  // symmetric; off-diagonals are synchronizing coefficients, pu/rad
  std::vector<Bus> buses;
  Trip trip;
  double duration_s = 10.0;
  double dt_sim = 0.002;
  SensorMap sensor_map;
  std::uint64_t seed = 1;

  /// Throws Error(kData, "validation") when any invariant is violated.
  void validate() const;
  /// H_i * Cap_i per machine, MW*s.
  std::vector<double> inertias() const;
  double total_inertia() const;
  /// Analytic initial COI slope -dP f_N / (2 sum I_i), Hz/s.
  double expected_initial_rocof() const;
  InertiaTable inertia_table() const;
};

struct SimResult {
  std::vector<double> times;       // epoch seconds at the reporting rate
  Eigen::MatrixXd rotor_speeds;    // machines x samples, Hz, noiseless
  Eigen::MatrixXd sensor_clean;    // sensors x samples, Hz, noiseless
  MeasurementSet measurements;     // sensor view with noise
  std::vector<double> true_coi;    // Hz, inertia-weighted rotor speed
  double true_rocof_initial = 0.0; // Hz/s, analytic
  std::size_t trip_sample = 0;     // reporting-grid index of the trip
  Scenario scenario_echo;
};

/// Fixed-step RK4 integration of the coupled swing equations
///   (2 H_i Cap_i / f_N) d(df_i)/dt = dP_i - D_i Cap_i df_i / f_N - base * sum_j K_ij (d_i - d_j)
///   d(d_i)/dt = 2 pi df_i
/// followed by decimation to the sensor reporting rate and seeded noise.
SimResult simulate(const Scenario& scenario);

/// Inertia-weighted mean of machine speeds at each sample.
std::vector<double> true_coi(const Eigen::MatrixXd& rotor_speeds, const std::vector<double>& inertias);

/// Named reference scenarios: edge_trip, central_trip, uniform.
std::vector<Scenario> scenario_presets();
std::optional<Scenario> find_preset(const std::string& name);

}  // namespace coiest::sim
