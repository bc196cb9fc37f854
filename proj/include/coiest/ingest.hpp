#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace coiest {

/// Frequencies outside this band are treated as bad readings.
inline constexpr double kPlausibleMinHz = 45.0;
inline constexpr double kPlausibleMaxHz = 75.0;

inline bool plausible_hz(double v) { return v >= kPlausibleMinHz && v <= kPlausibleMaxHz; }

/// One sensor's raw frequency record. Gaps are stored as NaN.
struct ChannelSeries {
  std::string channel_id;
  std::optional<std::string> location_label;
  std::vector<double> timestamps;  // epoch seconds, strictly increasing
  std::vector<double> values;      // Hz
};

using BoolMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// N channels sampled on the common grid t0_epoch + m * dt, m = 0..M-1.
///
/// `masked(n, m)` marks cells excluded from every fit. Masked cells keep
/// their raw reading when one exists (an 80 Hz spike stays visible to the
/// quality report) and hold NaN for gaps.
struct MeasurementSet {
  std::vector<std::string> channel_ids;
  double t0_epoch = 0.0;
  double dt = 0.1;
  Eigen::MatrixXd frame;  // N x M, Hz
  BoolMatrix masked;      // N x M

  std::size_t channels() const { return static_cast<std::size_t>(frame.rows()); }
  std::size_t samples() const { return static_cast<std::size_t>(frame.cols()); }
  double time_at(std::size_t m) const { return t0_epoch + static_cast<double>(m) * dt; }
  bool usable(std::size_t n, std::size_t m) const {
    return !masked(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
  }
  double value(std::size_t n, std::size_t m) const {
    return frame(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
  }

  /// Throws Error(kData) if the structural invariants do not hold.
  void validate() const;
};

struct GapPolicy {
  std::size_t interpolate_max_gap = 2;
  double drop_channel_threshold = 0.5;
};

struct AlignResult {
  MeasurementSet set;
  std::vector<std::string> dropped_channels;
  std::size_t filled_cells = 0;
};

/// Parses `timestamp,<id>...` CSV. Timestamps may be epoch seconds or
/// ISO-8601 UTC. Empty fields become gaps; lines starting with '#' are skipped.
std::vector<ChannelSeries> parse_csv(std::istream& source);
std::vector<ChannelSeries> parse_csv_string(const std::string& text);

/// Writes the set in the same schema parse_csv reads. Masked cells are
/// emitted as empty fields; numbers use round-trip precision.
void emit_csv(const MeasurementSet& set, std::ostream& out);

/// Resamples channels onto a common grid over the intersection of their
/// time ranges. Never extrapolates.
AlignResult align(const std::vector<ChannelSeries>& channels, double dt,
                  const GapPolicy& policy = {});

/// Inverse view of a set, used to re-align or re-emit. Masked cells become gaps.
std::vector<ChannelSeries> to_channels(const MeasurementSet& set);

struct ChannelQuality {
  std::string id;
  double bad_fraction = 0.0;
  std::size_t longest_gap = 0;
  double min_hz = 0.0;  // NaN when the channel has no finite readings
  double max_hz = 0.0;
  bool in_band = true;
};

struct QualityReport {
  std::vector<ChannelQuality> channels;
  bool pass = true;
};

QualityReport quality_report(const MeasurementSet& set);

/// Parses an ISO-8601 UTC timestamp (`YYYY-MM-DDTHH:MM:SS[.fff][Z|+00:00]`)
/// into epoch seconds. Returns nullopt if the text is not in that form.
std::optional<double> parse_iso8601(const std::string& text);

}  // namespace coiest
