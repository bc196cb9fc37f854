#include "coiest/event_detect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace coiest {
namespace {

constexpr const char* kModule = "event_detect";

[[noreturn]] void range_error(const std::string& msg) {
  throw Error(ErrorKind::kData, "range", kModule, msg);
}

double median_of(std::vector<double>& v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

}  // namespace

void DetectorConfig::validate(double dt) const {
  if (!(rocof_threshold > 0.0)) {
    throw Error(ErrorKind::kUsage, "config", kModule, "rocof_threshold must be positive");
  }
  if (confirm_samples < 1) throw Error(ErrorKind::kUsage, "config", kModule, "confirm_samples must be >= 1");
  if (!(window_seconds >= 2.0 * dt)) {
    throw Error(ErrorKind::kUsage, "config", kModule, "window_seconds must cover at least two samples");
  }
}

std::size_t window_samples(double window_seconds, double dt) {
  return static_cast<std::size_t>(std::floor(window_seconds / dt + 1e-9));
}

Eigen::VectorXd median_series(const MeasurementSet& set) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(set.samples()));
  std::vector<double> live;
  live.reserve(set.channels());
  for (std::size_t m = 0; m < set.samples(); ++m) {
    live.clear();
    for (std::size_t n = 0; n < set.channels(); ++n) {
      if (set.usable(n, m)) live.push_back(set.value(n, m));
    }
    out(static_cast<Eigen::Index>(m)) = live.empty() ? std::numeric_limits<double>::quiet_NaN() : median_of(live);
  }
  return out;
}

EventWindow detect_event(const MeasurementSet& set, const DetectorConfig& cfg) {
  set.validate();
  cfg.validate(set.dt);
  const std::size_t samples = set.samples();
  if (samples < 2 * cfg.confirm_samples) {
    throw Error(ErrorKind::kData, "data", kModule, "too few samples for the confirmation length");
  }

  const Eigen::VectorXd med = median_series(set);
  auto quotient = [&](std::size_t m) {
    return (med(static_cast<Eigen::Index>(m + 1)) - med(static_cast<Eigen::Index>(m))) / set.dt;
  };

  std::size_t onset = samples;
  std::size_t run = 0;
  int run_sign = 0;
  for (std::size_t m = 0; m + 1 < samples; ++m) {
    const double q = quotient(m);
    const int sign = q > 0.0 ? 1 : -1;
    if (std::isfinite(q) && std::abs(q) > cfg.rocof_threshold) {
      if (run > 0 && sign == run_sign) {
        ++run;
      } else {
        run = 1;
        run_sign = sign;
      }
    } else {
      run = 0;
    }
    if (run == cfg.confirm_samples) {
      onset = m + 1 - cfg.confirm_samples;
      break;
    }
  }
  if (onset == samples) {
    throw Error(ErrorKind::kNoEvent, "no_event", kModule, "no RoCoF excursion above threshold");
  }

  EventWindow w;
  w.start_index = onset;
  w.t0 = set.time_at(onset);
  w.f0 = med(static_cast<Eigen::Index>(onset));
  w.dt = set.dt;
  w.k_samples = window_samples(cfg.window_seconds, set.dt);
  const std::size_t max_k = samples - 1 - onset;
  if (w.k_samples > max_k) {
    throw TruncatedWindowError(max_k, "fit window of " + std::to_string(w.k_samples) +
                                          " samples exceeds data; at most " + std::to_string(max_k) +
                                          " available after t0");
  }
  return w;
}

EventWindow manual_window(double t0, double f0, std::size_t k_samples, const MeasurementSet& set) {
  set.validate();
  if (k_samples < 2) range_error("k_samples must be at least 2");
  if (!std::isfinite(t0) || !std::isfinite(f0)) range_error("t0 and f0 must be finite");
  const double offset = (t0 - set.t0_epoch) / set.dt;
  const double snapped = std::round(offset);
  if (snapped < 0.0) range_error("t0 precedes the first sample");
  const auto index = static_cast<std::size_t>(snapped);
  if (index + k_samples > set.samples() - 1) range_error("window T1..TK runs past the last sample");

  EventWindow w;
  w.t0 = t0;
  w.f0 = f0;
  w.k_samples = k_samples;
  w.dt = set.dt;
  w.start_index = index;
  return w;
}

}  // namespace coiest
