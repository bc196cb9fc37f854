#pragma once

#include <cstddef>

#include "coiest/error.hpp"
#include "coiest/ingest.hpp"

namespace coiest {

/// Event anchor for the fit: start time T0, start frequency F0 and the K
/// post-event samples T1..TK that follow it on the set's grid.
struct EventWindow {
  double t0 = 0.0;
  double f0 = 0.0;
  std::size_t k_samples = 0;
  double dt = 0.0;
  std::size_t start_index = 0;  // grid index of T0
};

struct DetectorConfig {
  double rocof_threshold = 0.005;  // Hz/s
  std::size_t confirm_samples = 3;
  double window_seconds = 1.0;

  void validate(double dt) const;
};

/// Raised when the event is found but K samples do not fit after it.
class TruncatedWindowError : public Error {
 public:
  TruncatedWindowError(std::size_t max_k, const std::string& message)
      : Error(ErrorKind::kData, "truncated_window", "event_detect", message), max_k_(max_k) {}
  std::size_t max_feasible_k() const noexcept { return max_k_; }

 private:
  std::size_t max_k_;
};

/// Cross-channel median per sample over unmasked cells; NaN where every
/// channel is masked.
Eigen::VectorXd median_series(const MeasurementSet& set);

/// Earliest onset where the median frequency's forward difference quotient
/// exceeds the threshold, with one sign, for `confirm_samples` consecutive
/// samples.
EventWindow detect_event(const MeasurementSet& set, const DetectorConfig& cfg = {});

/// Validates an externally supplied anchor. `t0` snaps to the nearest grid
/// sample for indexing; the window echoes the values given.
EventWindow manual_window(double t0, double f0, std::size_t k_samples, const MeasurementSet& set);

std::size_t window_samples(double window_seconds, double dt);

}  // namespace coiest
