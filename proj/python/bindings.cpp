#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "coiest/pipeline.hpp"

namespace py = pybind11;
using namespace coiest;

namespace {

py::object to_python(const Json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

Json from_python(const py::object& o) {
  return Json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

sim::Scenario scenario_arg(const py::object& o) {
  if (py::isinstance<py::str>(o)) return resolve_scenario(o.cast<std::string>());
  return scenario_from_json(from_python(o));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Center-of-inertia frequency, RoCoF and event-size estimation";

  static py::exception<Error> coi_error(m, "CoiError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object inst = py::reinterpret_borrow<py::object>(coi_error.ptr())(e.what());
      inst.attr("code") = e.code();
      inst.attr("module") = e.module();
      PyErr_SetObject(coi_error.ptr(), inst.ptr());
    }
  });

  py::class_<ChannelSeries>(m, "ChannelSeries")
      .def_readwrite("channel_id", &ChannelSeries::channel_id)
      .def_readwrite("timestamps", &ChannelSeries::timestamps)
      .def_readwrite("values", &ChannelSeries::values);

  py::class_<MeasurementSet>(m, "MeasurementSet")
      .def(py::init([](std::vector<std::string> ids, double t0, double dt, Eigen::MatrixXd frame,
                       std::optional<BoolMatrix> masked) {
             MeasurementSet s;
             s.channel_ids = std::move(ids);
             s.t0_epoch = t0;
             s.dt = dt;
             s.frame = std::move(frame);
             s.masked = masked ? *masked : BoolMatrix::Constant(s.frame.rows(), s.frame.cols(), false);
             s.validate();
             return s;
           }),
           py::arg("channel_ids"), py::arg("t0_epoch"), py::arg("dt"), py::arg("frame"),
           py::arg("masked") = py::none())
      .def_readonly("channel_ids", &MeasurementSet::channel_ids)
      .def_readonly("t0_epoch", &MeasurementSet::t0_epoch)
      .def_readonly("dt", &MeasurementSet::dt)
      .def_readonly("frame", &MeasurementSet::frame)
      .def_readonly("masked", &MeasurementSet::masked)
      .def("to_csv", [](const MeasurementSet& s) {
        std::ostringstream out;
        emit_csv(s, out);
        return out.str();
      });

  py::class_<GapPolicy>(m, "GapPolicy")
      .def(py::init<>())
      .def_readwrite("interpolate_max_gap", &GapPolicy::interpolate_max_gap)
      .def_readwrite("drop_channel_threshold", &GapPolicy::drop_channel_threshold);

  py::class_<AlignResult>(m, "AlignResult")
      .def_readonly("set", &AlignResult::set)
      .def_readonly("dropped_channels", &AlignResult::dropped_channels)
      .def_readonly("filled_cells", &AlignResult::filled_cells);

  py::class_<DetectorConfig>(m, "DetectorConfig")
      .def(py::init<>())
      .def_readwrite("rocof_threshold", &DetectorConfig::rocof_threshold)
      .def_readwrite("confirm_samples", &DetectorConfig::confirm_samples)
      .def_readwrite("window_seconds", &DetectorConfig::window_seconds);

  py::class_<EventWindow>(m, "EventWindow")
      .def_readonly("t0", &EventWindow::t0)
      .def_readonly("f0", &EventWindow::f0)
      .def_readonly("k_samples", &EventWindow::k_samples)
      .def_readonly("dt", &EventWindow::dt)
      .def_readonly("start_index", &EventWindow::start_index);

  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init<>())
      .def_readwrite("omega", &SolverConfig::omega)
      .def_readwrite("min_condition_warn", &SolverConfig::min_condition_warn);

  py::class_<LinearSystem>(m, "LinearSystem")
      .def_readonly("a", &LinearSystem::a)
      .def_readonly("b", &LinearSystem::b)
      .def_readonly("n_channels", &LinearSystem::n_channels)
      .def_readonly("k_samples", &LinearSystem::k_samples);

  py::class_<WeightSolution>(m, "WeightSolution")
      .def_readonly("weights", &WeightSolution::weights)
      .def_readonly("delta_f", &WeightSolution::delta_f)
      .def_readonly("f0_fit", &WeightSolution::f0_fit)
      .def_readonly("residual_norm", &WeightSolution::residual_norm)
      .def_readonly("weight_sum", &WeightSolution::weight_sum)
      .def_readonly("condition_estimate", &WeightSolution::condition_estimate)
      .def_readonly("flags", &WeightSolution::flags)
      .def("normalized_weights", &WeightSolution::normalized_weights)
      .def("to_dict", [](const WeightSolution& s) { return to_python(to_json(s)); });

  py::class_<CoiEstimate>(m, "CoiEstimate")
      .def_property_readonly("method", [](const CoiEstimate& e) { return to_string(e.method); })
      .def_readonly("timestamps", &CoiEstimate::timestamps)
      .def_readonly("f_coi", &CoiEstimate::f_coi)
      .def_readonly("rocof_fit", &CoiEstimate::rocof_fit)
      .def_readonly("rocof_nerc", &CoiEstimate::rocof_nerc)
      .def("to_dict", [](const CoiEstimate& e) { return to_python(to_json(e)); });

  m.def("parse_csv", &parse_csv_string, py::arg("text"));
  m.def("align", &align, py::arg("channels"), py::arg("dt"), py::arg("policy") = GapPolicy{});
  m.def("quality_report", [](const MeasurementSet& s) { return to_python(to_json(quality_report(s))); });
  m.def("detect_event", &detect_event, py::arg("set"), py::arg("config") = DetectorConfig{});
  m.def("manual_window", &manual_window, py::arg("t0"), py::arg("f0"), py::arg("k_samples"), py::arg("set"));
  m.def("build_system",
        py::overload_cast<const MeasurementSet&, const EventWindow&, const SolverConfig&>(&build_system),
        py::arg("set"), py::arg("window"), py::arg("config") = SolverConfig{});
  m.def("solve_weights", &solve_weights, py::arg("system"), py::arg("config") = SolverConfig{});
  m.def("coi_series", &coi_series, py::arg("set"), py::arg("weights"));
  m.def("rocof_nerc", [](const CoiEstimate& e, const EventWindow& w) { return rocof_nerc(e, w).value; });
  m.def("median_baseline", &median_baseline, py::arg("set"), py::arg("window"));
  m.def(
      "estimate_proposed",
      [](const MeasurementSet& s, const EventWindow& w, const SolverConfig& c) {
        auto r = estimate_proposed(s, w, c);
        return py::make_tuple(r.solution, r.estimate);
      },
      py::arg("set"), py::arg("window"), py::arg("config") = SolverConfig{});

  m.def(
      "system_inertia",
      [](const std::vector<std::tuple<std::string, double, double, bool>>& units) {
        InertiaTable t;
        for (const auto& [id, h, cap, committed] : units) t.units.push_back({id, h, cap, committed});
        return system_inertia(t);
      },
      py::arg("units"), "units: list of (unit_id, h_s, cap_mva, committed)");
  m.def(
      "estimate_event_mw",
      [](double i_sys, double rocof, double f_nominal) { return to_python(to_json(estimate_event_mw(i_sys, rocof, f_nominal))); },
      py::arg("i_sys_mws"), py::arg("rocof_hz_s"), py::arg("f_nominal_hz") = 60.0);

  m.def("scenario_presets", [] {
    py::list out;
    for (const auto& s : sim::scenario_presets()) out.append(to_python(scenario_to_json(s)));
    return out;
  });
  m.def(
      "simulate",
      [](const py::object& scenario) {
        const auto r = sim::simulate(scenario_arg(scenario));
        py::dict d;
        d["times"] = r.times;
        d["rotor_speeds"] = r.rotor_speeds;
        d["true_coi"] = r.true_coi;
        d["true_rocof_initial"] = r.true_rocof_initial;
        d["trip_sample"] = r.trip_sample;
        d["measurements"] = r.measurements;
        d["scenario"] = to_python(scenario_to_json(r.scenario_echo));
        return d;
      },
      py::arg("scenario"), "scenario: preset name or scenario dict");
  m.def("true_coi", &sim::true_coi, py::arg("rotor_speeds"), py::arg("inertias"));

  m.def(
      "cmd_estimate",
      [](const std::string& input, std::optional<std::string> inertia, double omega, double window_s) {
        RunConfig cfg;
        cfg.input_path = input;
        cfg.inertia_path = std::move(inertia);
        cfg.omega = omega;
        cfg.window_seconds = window_s;
        return to_python(cmd_estimate(cfg));
      },
      py::arg("input"), py::arg("inertia") = py::none(), py::arg("omega") = 30.0, py::arg("window_s") = 1.0);
  m.def(
      "cmd_simulate",
      [](const std::string& scenario, const std::string& prefix, std::optional<std::uint64_t> seed) {
        const auto f = cmd_simulate(scenario, prefix, seed);
        return py::make_tuple(f.measurements_path, f.truth_path, f.scenario_path);
      },
      py::arg("scenario"), py::arg("out_prefix"), py::arg("seed") = py::none());
  m.def(
      "cmd_compare",
      [](const std::string& measurements, const std::string& truth, double omega) {
        RunConfig cfg;
        cfg.input_path = measurements;
        cfg.omega = omega;
        return to_python(cmd_compare(measurements, truth, cfg));
      },
      py::arg("measurements"), py::arg("truth"), py::arg("omega") = 30.0);
}
