#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "coiest/error.hpp"
#include "coiest/event_detect.hpp"
#include "coiest/ingest.hpp"

namespace coiest {

struct SolverConfig {
  /// Relaxation weight on the soft constraints sum(x) = 1 and x_i = 1/N.
  double omega = 30.0;
  /// Condition estimates above this attach an `ill_conditioned` flag.
  double min_condition_warn = 1e12;

  void validate() const;
};

/// The stacked least-squares problem min ||A x_E - b|| with
/// x_E = [x_1..x_N, dF, F0].
///
/// Rows 0..K-1 hold the constant-RoCoF fit
///   f_1[T_k] x_1 + ... + f_N[T_k] x_N - k dF - F0 = 0,
/// row K is omega * sum(x) = omega, and rows K+1..K+N are omega * x_i = omega / N.
struct LinearSystem {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  std::size_t n_channels = 0;
  std::size_t k_samples = 0;
  double omega = 0.0;
};

struct WeightSolution {
  Eigen::VectorXd weights;  // x_1..x_N, dimensionless
  double delta_f = 0.0;     // Hz per sample
  double f0_fit = 0.0;      // Hz
  double residual_norm = 0.0;
  double weight_sum = 0.0;
  double condition_estimate = 0.0;
  /// Upper bound on |weight_sum - 1|: the fit residual of uniform weights
  /// divided by omega. The optimum can never cost more than that point.
  double weight_sum_bound = 0.0;
  std::vector<std::string> flags;

  /// Weights rescaled to sum to one; these are the effective COI shares.
  Eigen::VectorXd normalized_weights() const { return weights / weight_sum; }
  /// Slope and intercept of the weighted COI line once the weights are
  /// normalized.
  double coi_delta_f() const { return delta_f / weight_sum; }
  double coi_f0() const { return f0_fit / weight_sum; }
  bool has_flag(const std::string& flag) const;
};

enum class CoiMethod { kProposed, kMedian };

std::string to_string(CoiMethod method);

struct CoiEstimate {
  CoiMethod method = CoiMethod::kProposed;
  std::vector<double> timestamps;
  std::vector<double> f_coi;  // NaN where no channel is usable
  double rocof_fit = 0.0;     // signed df/dt, Hz/s; negative on decline
  double rocof_nerc = 0.0;    // (f(t0) - f(t0 + 0.5 s)) / 0.5; positive on decline
  double nerc_t_start = 0.0;  // sample times actually used by rocof_nerc
  double nerc_t_end = 0.0;
};

class SingularSystemError : public Error {
 public:
  SingularSystemError(double condition, const std::string& message)
      : Error(ErrorKind::kSolver, "singular_system", "coi_core", message), condition_(condition) {}
  double condition_estimate() const noexcept { return condition_; }

 private:
  double condition_;
};

LinearSystem build_system(const MeasurementSet& set, const EventWindow& window, const SolverConfig& cfg);

/// Lower-level entry: the fit-row frequency block (K x N) already extracted.
LinearSystem build_system(const Eigen::MatrixXd& window_frequencies, double omega);

/// Least-squares solve by column-pivoted Householder QR.
WeightSolution solve_weights(const LinearSystem& system, const SolverConfig& cfg = {});

/// Weighted COI series over the whole record, renormalizing over the
/// channels usable at each instant.
CoiEstimate coi_series(const MeasurementSet& set, const Eigen::VectorXd& weights);

double rocof_fit(const WeightSolution& solution, double dt);

struct NercRocof {
  double value = 0.0;
  double t_start = 0.0;
  double t_end = 0.0;
};

/// Two-point RoCoF over the first half second after t0, looked up at the
/// nearest samples.
NercRocof rocof_nerc(const CoiEstimate& estimate, const EventWindow& window);

CoiEstimate median_baseline(const MeasurementSet& set, const EventWindow& window);

struct ProposedResult {
  WeightSolution solution;
  CoiEstimate estimate;
};

/// build_system -> solve_weights -> coi_series -> both RoCoF figures.
ProposedResult estimate_proposed(const MeasurementSet& set, const EventWindow& window, const SolverConfig& cfg);

}  // namespace coiest
