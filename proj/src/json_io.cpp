#include "coiest/json_io.hpp"

#include <cmath>

namespace coiest {
namespace {

// NaN and infinities have no JSON form; emit null.
Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

[[noreturn]] void schema_error(const std::string& msg) {
  throw Error(ErrorKind::kData, "schema", "sim_oracle", "scenario schema: " + msg);
}

template <typename T>
T required(const Json& j, const char* key) {
  if (!j.contains(key)) schema_error(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    schema_error(std::string("field '") + key + "' has the wrong type");
  }
}

template <typename T>
T optional_field(const Json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    schema_error(std::string("field '") + key + "' has the wrong type");
  }
}

}  // namespace

Json to_json(const QualityReport& report) {
  Json channels = Json::array();
  for (const auto& c : report.channels) {
    channels.push_back({{"id", c.id},
                        {"bad_fraction", c.bad_fraction},
                        {"longest_gap", c.longest_gap},
                        {"min_hz", number(c.min_hz)},
                        {"max_hz", number(c.max_hz)}});
  }
  return {{"channels", channels}, {"pass", report.pass}};
}

Json to_json(const EventWindow& window) {
  return {{"t0", window.t0}, {"f0", window.f0}, {"k_samples", window.k_samples}, {"dt", window.dt}};
}

Json to_json(const DetectorConfig& cfg) {
  return {{"rocof_threshold", cfg.rocof_threshold},
          {"confirm_samples", cfg.confirm_samples},
          {"window_seconds", cfg.window_seconds}};
}

Json to_json(const WeightSolution& solution) {
  Json weights = Json::array();
  for (Eigen::Index i = 0; i < solution.weights.size(); ++i) weights.push_back(solution.weights(i));
  return {{"weights", weights},
          {"delta_f", solution.delta_f},
          {"f0_fit", solution.f0_fit},
          {"residual_norm", solution.residual_norm},
          {"weight_sum", solution.weight_sum},
          {"condition_estimate", number(solution.condition_estimate)},
          {"flags", solution.flags}};
}

Json to_json(const CoiEstimate& estimate) {
  Json series = Json::array();
  for (std::size_t i = 0; i < estimate.f_coi.size(); ++i) {
    series.push_back(Json::array({estimate.timestamps[i], number(estimate.f_coi[i])}));
  }
  return {{"method", to_string(estimate.method)},
          {"rocof_fit", number(estimate.rocof_fit)},
          {"rocof_nerc", number(estimate.rocof_nerc)},
          {"series", series}};
}

Json to_json(const EventMagnitude& m) {
  return {{"p_event_mw", m.p_event_mw},
          {"i_sys_mws", m.i_sys_mws},
          {"rocof_used_hz_s", m.rocof_used_hz_s},
          {"f_nominal_hz", m.f_nominal_hz}};
}

Json scenario_to_json(const sim::Scenario& s) {
  Json machines = Json::array();
  for (const auto& m : s.machines) machines.push_back({{"h", m.h}, {"cap", m.cap}, {"damping", m.damping}});
  Json coupling = Json::array();
  for (Eigen::Index i = 0; i < s.coupling.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < s.coupling.cols(); ++j) row.push_back(s.coupling(i, j));
    coupling.push_back(row);
  }
  Json buses = Json::array();
  for (const auto& b : s.buses) buses.push_back({{"name", b.name}, {"shares", b.shares}});
  Json trip = Json::object();
  if (s.trip.machine_index) trip["machine_index"] = *s.trip.machine_index;
  if (s.trip.load_bus) trip["load_bus"] = *s.trip.load_bus;
  trip["delta_p_mw"] = s.trip.delta_p_mw;
  trip["time_s"] = s.trip.time_s;
  Json sensors = Json::array();
  for (const auto& sensor : s.sensor_map.sensors) {
    Json j = {{"id", sensor.id}};
    if (sensor.machine) j["machine"] = *sensor.machine;
    if (sensor.bus) j["bus"] = *sensor.bus;
    j["noise_std_hz"] = sensor.noise_std_hz;
    sensors.push_back(j);
  }
  return {{"name", s.name},
          {"description", s.description},
          {"f_nominal_hz", s.f_nominal_hz},
          {"base_mva", s.base_mva},
          {"start_epoch", s.start_epoch},
          {"machines", machines},
          {"coupling", coupling},
          {"buses", buses},
          {"trip", trip},
          {"duration_s", s.duration_s},
          {"dt_sim", s.dt_sim},
          {"sensor_map", {{"rate_fps", s.sensor_map.rate_fps}, {"sensors", sensors}}},
          {"seed", s.seed}};
}

sim::Scenario scenario_from_json(const Json& j) {
  if (!j.is_object()) schema_error("top level must be an object");
  sim::Scenario s;
  s.name = optional_field<std::string>(j, "name", "custom");
  s.description = optional_field<std::string>(j, "description", "");
  s.f_nominal_hz = optional_field<double>(j, "f_nominal_hz", 60.0);
  s.base_mva = optional_field<double>(j, "base_mva", 100.0);
  s.start_epoch = optional_field<double>(j, "start_epoch", 1.6e9);

  const auto machines = required<Json>(j, "machines");
  if (!machines.is_array()) schema_error("'machines' must be an array");
  for (const auto& m : machines) {
    s.machines.push_back({required<double>(m, "h"), required<double>(m, "cap"), optional_field<double>(m, "damping", 0.0)});
  }

  const auto coupling = required<std::vector<std::vector<double>>>(j, "coupling");
  s.coupling.resize(static_cast<Eigen::Index>(coupling.size()),
                    coupling.empty() ? 0 : static_cast<Eigen::Index>(coupling.front().size()));
  for (std::size_t r = 0; r < coupling.size(); ++r) {
    if (coupling[r].size() != static_cast<std::size_t>(s.coupling.cols())) schema_error("'coupling' rows differ in length");
    for (std::size_t c = 0; c < coupling[r].size(); ++c) {
      s.coupling(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = coupling[r][c];
    }
  }

  for (const auto& b : optional_field<Json>(j, "buses", Json::array())) {
    s.buses.push_back({required<std::string>(b, "name"), required<std::vector<double>>(b, "shares")});
  }

  const auto trip = required<Json>(j, "trip");
  if (trip.contains("machine_index")) s.trip.machine_index = required<std::size_t>(trip, "machine_index");
  if (trip.contains("load_bus")) s.trip.load_bus = required<std::string>(trip, "load_bus");
  s.trip.delta_p_mw = required<double>(trip, "delta_p_mw");
  s.trip.time_s = required<double>(trip, "time_s");

  s.duration_s = required<double>(j, "duration_s");
  s.dt_sim = optional_field<double>(j, "dt_sim", 0.002);
  const auto map = required<Json>(j, "sensor_map");
  s.sensor_map.rate_fps = optional_field<double>(map, "rate_fps", 10.0);
  for (const auto& sensor : required<Json>(map, "sensors")) {
    sim::Sensor out;
    out.id = required<std::string>(sensor, "id");
    if (sensor.contains("machine")) out.machine = required<std::size_t>(sensor, "machine");
    if (sensor.contains("bus")) out.bus = required<std::string>(sensor, "bus");
    out.noise_std_hz = optional_field<double>(sensor, "noise_std_hz", 0.0005);
    s.sensor_map.sensors.push_back(std::move(out));
  }
  s.seed = optional_field<std::uint64_t>(j, "seed", 1);
  s.validate();
  return s;
}

sim::Scenario scenario_from_json_text(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    schema_error(std::string("not valid JSON: ") + e.what());
  }
  return scenario_from_json(j);
}

}  // namespace coiest
