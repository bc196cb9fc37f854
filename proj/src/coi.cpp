#include "coiest/coi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/QR>
#include <Eigen/SVD>

namespace coiest {
namespace {

constexpr const char* kModule = "coi_core";
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

[[noreturn]] void window_invalid(const std::string& msg) {
  throw Error(ErrorKind::kData, "window_invalid", kModule, msg);
}

void check_window_in_set(const MeasurementSet& set, const EventWindow& window) {
  if (window.start_index + window.k_samples > set.samples() - 1) {
    throw Error(ErrorKind::kData, "range", kModule, "fit window runs past the last sample");
  }
}

// Fit residual of the uniform-weight point with its best line; |sum(x) - 1|
// at the optimum cannot exceed this divided by omega.
double uniform_point_residual(const LinearSystem& sys) {
  const auto k = static_cast<Eigen::Index>(sys.k_samples);
  const auto n = static_cast<Eigen::Index>(sys.n_channels);
  const Eigen::VectorXd series =
      sys.a.topLeftCorner(k, n) * Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  const Eigen::MatrixXd line = sys.a.block(0, n, k, 2);
  const Eigen::VectorXd coef = line.colPivHouseholderQr().solve(series);
  return (series - line * coef).norm();
}

}  // namespace

void SolverConfig::validate() const {
  if (!(omega > 0.0) || !std::isfinite(omega)) {
    throw Error(ErrorKind::kUsage, "config", kModule, "omega must be positive");
  }
}

bool WeightSolution::has_flag(const std::string& flag) const {
  return std::find(flags.begin(), flags.end(), flag) != flags.end();
}

std::string to_string(CoiMethod method) {
  return method == CoiMethod::kProposed ? "proposed" : "median";
}

LinearSystem build_system(const Eigen::MatrixXd& window_frequencies, double omega) {
  const Eigen::Index k = window_frequencies.rows();
  const Eigen::Index n = window_frequencies.cols();
  if (n < 1) throw Error(ErrorKind::kSolver, "underdetermined", kModule, "no channels in fit window");
  if (k <= n + 1) {
    throw Error(ErrorKind::kSolver, "underdetermined", kModule,
                "need K > N + 1 fit samples; have K=" + std::to_string(k) + ", N=" + std::to_string(n));
  }
  if (!(omega > 0.0)) throw Error(ErrorKind::kUsage, "config", kModule, "omega must be positive");

  LinearSystem sys;
  sys.n_channels = static_cast<std::size_t>(n);
  sys.k_samples = static_cast<std::size_t>(k);
  sys.omega = omega;
  sys.a = Eigen::MatrixXd::Zero(k + 1 + n, n + 2);
  sys.b = Eigen::VectorXd::Zero(k + 1 + n);

  sys.a.topLeftCorner(k, n) = window_frequencies;
  for (Eigen::Index row = 0; row < k; ++row) {
    sys.a(row, n) = -static_cast<double>(row + 1);
    sys.a(row, n + 1) = -1.0;
  }
  sys.a.block(k, 0, 1, n).setConstant(omega);
  sys.b(k) = omega;
  for (Eigen::Index i = 0; i < n; ++i) {
    sys.a(k + 1 + i, i) = omega;
    sys.b(k + 1 + i) = omega / static_cast<double>(n);
  }
  return sys;
}

LinearSystem build_system(const MeasurementSet& set, const EventWindow& window, const SolverConfig& cfg) {
  set.validate();
  cfg.validate();
  const std::size_t n = set.channels();
  const std::size_t k = window.k_samples;
  if (k <= n + 1) {
    throw Error(ErrorKind::kSolver, "underdetermined", kModule,
                "need K > N + 1 fit samples; have K=" + std::to_string(k) + ", N=" + std::to_string(n));
  }
  check_window_in_set(set, window);

  Eigen::MatrixXd block(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n));
  for (std::size_t row = 0; row < k; ++row) {
    const std::size_t m = window.start_index + 1 + row;
    for (std::size_t ch = 0; ch < n; ++ch) {
      if (!set.usable(ch, m) || !std::isfinite(set.value(ch, m))) {
        window_invalid("masked cell in fit window: channel " + set.channel_ids[ch] + ", sample T" +
                       std::to_string(row + 1) + " (grid index " + std::to_string(m) + ")");
      }
      block(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(ch)) = set.value(ch, m);
    }
  }
  return build_system(block, cfg.omega);
}

WeightSolution solve_weights(const LinearSystem& system, const SolverConfig& cfg) {
  const Eigen::Index cols = system.a.cols();
  const auto n = static_cast<Eigen::Index>(system.n_channels);
  if (cols != n + 2 || system.a.rows() != system.b.size() || system.a.rows() < cols) {
    throw Error(ErrorKind::kSolver, "shape", kModule, "system shape inconsistent with N channels");
  }

  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(system.a);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double smax = sv(0);
  const double smin = sv(sv.size() - 1);
  const double cond = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
  const double rank_tol = smax * std::numeric_limits<double>::epsilon() * static_cast<double>(system.a.rows());
  if (!(smin > rank_tol)) {
    throw SingularSystemError(cond, "least-squares system is rank deficient (condition " + std::to_string(cond) + ")");
  }

  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(system.a);
  Eigen::VectorXd x = qr.solve(system.b);
  // One refinement pass against the original system.
  const Eigen::VectorXd r = system.b - system.a * x;
  x += qr.solve(r);

  WeightSolution sol;
  sol.weights = x.head(n);
  sol.delta_f = x(n);
  sol.f0_fit = x(n + 1);
  sol.residual_norm = (system.a * x - system.b).norm();
  sol.weight_sum = sol.weights.sum();
  sol.condition_estimate = cond;
  sol.weight_sum_bound = uniform_point_residual(system) / system.omega;
  if ((sol.weights.array() < 0.0).any()) sol.flags.emplace_back("negative_weights");
  if (cond > cfg.min_condition_warn) sol.flags.emplace_back("ill_conditioned");
  return sol;
}

CoiEstimate coi_series(const MeasurementSet& set, const Eigen::VectorXd& weights) {
  if (static_cast<std::size_t>(weights.size()) != set.channels()) {
    throw Error(ErrorKind::kData, "shape", kModule, "weight count does not match channel count");
  }
  const double total = weights.sum();
  if (!(std::abs(total) > 1e-12 * weights.cwiseAbs().sum())) {
    throw Error(ErrorKind::kSolver, "degenerate_weights", kModule, "weights sum to zero");
  }

  CoiEstimate est;
  est.method = CoiMethod::kProposed;
  est.timestamps.reserve(set.samples());
  est.f_coi.reserve(set.samples());
  for (std::size_t m = 0; m < set.samples(); ++m) {
    double num = 0.0;
    double den = 0.0;
    bool any = false;
    for (std::size_t n = 0; n < set.channels(); ++n) {
      if (!set.usable(n, m) || !std::isfinite(set.value(n, m))) continue;
      const double w = weights(static_cast<Eigen::Index>(n));
      num += w * set.value(n, m);
      den += w;
      any = true;
    }
    est.timestamps.push_back(set.time_at(m));
    est.f_coi.push_back(any && den != 0.0 ? num / den : kNaN);
  }
  est.rocof_fit = kNaN;
  est.rocof_nerc = kNaN;
  est.nerc_t_start = kNaN;
  est.nerc_t_end = kNaN;
  return est;
}

double rocof_fit(const WeightSolution& solution, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorKind::kUsage, "config", kModule, "dt must be positive");
  return solution.delta_f / dt;
}

NercRocof rocof_nerc(const CoiEstimate& estimate, const EventWindow& window) {
  if (!(window.dt > 0.0)) throw Error(ErrorKind::kUsage, "config", kModule, "window dt must be positive");
  const auto offset = static_cast<std::size_t>(std::llround(0.5 / window.dt));
  const std::size_t i0 = window.start_index;
  const std::size_t i1 = i0 + offset;
  if (i1 >= estimate.f_coi.size()) {
    throw Error(ErrorKind::kData, "range", kModule, "t0 + 0.5 s lies past the end of the series");
  }
  const double f_start = estimate.f_coi[i0];
  const double f_end = estimate.f_coi[i1];
  if (!std::isfinite(f_start) || !std::isfinite(f_end)) {
    throw Error(ErrorKind::kData, "range", kModule, "COI series undefined at a NERC lookup time");
  }
  return {(f_start - f_end) / 0.5, estimate.timestamps[i0], estimate.timestamps[i1]};
}

CoiEstimate median_baseline(const MeasurementSet& set, const EventWindow& window) {
  set.validate();
  check_window_in_set(set, window);
  const Eigen::VectorXd med = median_series(set);

  CoiEstimate est;
  est.method = CoiMethod::kMedian;
  for (std::size_t m = 0; m < set.samples(); ++m) {
    est.timestamps.push_back(set.time_at(m));
    est.f_coi.push_back(med(static_cast<Eigen::Index>(m)));
  }

  // Ordinary least-squares line through (k dt, median[T_k]), k = 1..K.
  const std::size_t k = window.k_samples;
  double mean_t = 0.0;
  double mean_f = 0.0;
  for (std::size_t i = 1; i <= k; ++i) {
    const double f = est.f_coi[window.start_index + i];
    if (!std::isfinite(f)) {
      window_invalid("all channels masked at fit sample T" + std::to_string(i));
    }
    mean_t += static_cast<double>(i) * set.dt;
    mean_f += f;
  }
  mean_t /= static_cast<double>(k);
  mean_f /= static_cast<double>(k);
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 1; i <= k; ++i) {
    const double dt_i = static_cast<double>(i) * set.dt - mean_t;
    sxy += dt_i * (est.f_coi[window.start_index + i] - mean_f);
    sxx += dt_i * dt_i;
  }
  est.rocof_fit = sxy / sxx;

  const NercRocof nerc = rocof_nerc(est, window);
  est.rocof_nerc = nerc.value;
  est.nerc_t_start = nerc.t_start;
  est.nerc_t_end = nerc.t_end;
  return est;
}

ProposedResult estimate_proposed(const MeasurementSet& set, const EventWindow& window, const SolverConfig& cfg) {
  ProposedResult out;
  out.solution = solve_weights(build_system(set, window, cfg), cfg);
  out.estimate = coi_series(set, out.solution.weights);
  out.estimate.rocof_fit = rocof_fit(out.solution, set.dt);
  const NercRocof nerc = rocof_nerc(out.estimate, window);
  out.estimate.rocof_nerc = nerc.value;
  out.estimate.nerc_t_start = nerc.t_start;
  out.estimate.nerc_t_end = nerc.t_end;
  return out;
}

}  // namespace coiest
