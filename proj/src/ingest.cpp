#include "coiest/ingest.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

#include "coiest/error.hpp"
#include "text_util.hpp"

namespace coiest {
namespace {

constexpr const char* kModule = "ingest";
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

[[noreturn]] void format_error(const std::string& msg) {
  throw Error(ErrorKind::kData, "format", kModule, msg);
}

[[noreturn]] void data_error(const std::string& msg) {
  throw Error(ErrorKind::kData, "data", kModule, msg);
}

[[noreturn]] void alignment_error(const std::string& msg) {
  throw Error(ErrorKind::kData, "alignment", kModule, msg);
}

std::optional<int> parse_int(std::string_view s) {
  int v = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

enum class Cell : unsigned char { kGood, kGap, kImplausible };

}  // namespace

std::optional<double> parse_iso8601(const std::string& text) {
  std::string_view s = detail::trim(text);
  // YYYY-MM-DDTHH:MM:SS is 19 characters.
  if (s.size() < 19 || s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') ||
      s[13] != ':' || s[16] != ':') {
    return std::nullopt;
  }
  const auto year = parse_int(s.substr(0, 4));
  const auto month = parse_int(s.substr(5, 2));
  const auto day = parse_int(s.substr(8, 2));
  const auto hour = parse_int(s.substr(11, 2));
  const auto minute = parse_int(s.substr(14, 2));
  if (!year || !month || !day || !hour || !minute) return std::nullopt;

  std::string_view rest = s.substr(17);
  if (rest.ends_with('Z')) {
    rest.remove_suffix(1);
  } else if (rest.ends_with("+00:00")) {
    rest.remove_suffix(6);
  }
  const auto seconds = detail::parse_double(rest);
  if (!seconds || *seconds < 0.0 || *seconds >= 61.0 || *hour > 23 || *minute > 59) {
    return std::nullopt;
  }

  using namespace std::chrono;
  const year_month_day ymd{std::chrono::year{*year}, std::chrono::month{static_cast<unsigned>(*month)},
                           std::chrono::day{static_cast<unsigned>(*day)}};
  if (!ymd.ok()) return std::nullopt;
  const auto days_since_epoch = sys_days{ymd}.time_since_epoch().count();
  return static_cast<double>(days_since_epoch) * 86400.0 + *hour * 3600.0 + *minute * 60.0 + *seconds;
}

void MeasurementSet::validate() const {
  if (frame.rows() < 1) data_error("measurement set has no channels");
  if (frame.cols() < 2) data_error("measurement set needs at least 2 samples");
  if (!(dt > 0.0) || !std::isfinite(dt)) data_error("sample interval must be positive");
  if (channel_ids.size() != channels()) data_error("channel id count does not match frame rows");
  if (masked.rows() != frame.rows() || masked.cols() != frame.cols()) {
    data_error("quality mask shape does not match frame");
  }
}

std::vector<ChannelSeries> parse_csv(std::istream& source) {
  std::vector<ChannelSeries> channels;
  bool have_header = false;
  std::size_t data_row = 0;
  std::string line;

  while (std::getline(source, line)) {
    const std::string_view view = detail::trim(line);
    if (view.empty() || view.front() == '#') continue;
    const auto fields = detail::split_fields(view);

    if (!have_header) {
      if (fields.front() != "timestamp") format_error("header must start with 'timestamp'");
      if (fields.size() < 2) format_error("header declares zero channels");
      std::set<std::string_view> seen;
      for (std::size_t i = 1; i < fields.size(); ++i) {
        if (fields[i].empty()) format_error("empty channel id in header column " + std::to_string(i + 1));
        if (!seen.insert(fields[i]).second) {
          format_error("duplicate channel id '" + std::string(fields[i]) + "'");
        }
        ChannelSeries ch;
        ch.channel_id = std::string(fields[i]);
        channels.push_back(std::move(ch));
      }
      have_header = true;
      continue;
    }

    ++data_row;
    const std::string where = "row " + std::to_string(data_row);
    if (fields.size() != channels.size() + 1) {
      format_error(where + ": expected " + std::to_string(channels.size() + 1) + " fields, got " +
                   std::to_string(fields.size()));
    }
    std::optional<double> t = detail::parse_double(fields[0]);
    if (!t) t = parse_iso8601(std::string(fields[0]));
    if (!t || !std::isfinite(*t)) format_error(where + ": unreadable timestamp '" + std::string(fields[0]) + "'");
    if (!channels.front().timestamps.empty() && !(*t > channels.front().timestamps.back())) {
      data_error("timestamps not strictly increasing at " + where);
    }
    for (std::size_t i = 0; i < channels.size(); ++i) {
      double v = kNaN;
      if (!fields[i + 1].empty()) {
        const auto parsed = detail::parse_double(fields[i + 1]);
        if (!parsed) {
          format_error(where + ": unreadable value '" + std::string(fields[i + 1]) + "' for channel " +
                       channels[i].channel_id);
        }
        v = *parsed;
      }
      channels[i].timestamps.push_back(*t);
      channels[i].values.push_back(v);
    }
  }
  if (!have_header) format_error("missing header row");
  return channels;
}

std::vector<ChannelSeries> parse_csv_string(const std::string& text) {
  std::istringstream in(text);
  return parse_csv(in);
}

void emit_csv(const MeasurementSet& set, std::ostream& out) {
  out << "timestamp";
  for (const auto& id : set.channel_ids) out << ',' << id;
  out << '\n';
  for (std::size_t m = 0; m < set.samples(); ++m) {
    out << detail::format_double(set.time_at(m));
    for (std::size_t n = 0; n < set.channels(); ++n) {
      out << ',';
      const double v = set.value(n, m);
      if (set.usable(n, m) && std::isfinite(v)) out << detail::format_double(v);
    }
    out << '\n';
  }
}

AlignResult align(const std::vector<ChannelSeries>& channels, double dt, const GapPolicy& policy) {
  if (channels.empty()) alignment_error("no channels to align");
  if (!(dt > 0.0) || !std::isfinite(dt)) alignment_error("sample interval must be positive");
  if (!(policy.drop_channel_threshold >= 0.0 && policy.drop_channel_threshold <= 1.0)) {
    alignment_error("drop_channel_threshold must lie in [0, 1]");
  }

  double start = -std::numeric_limits<double>::infinity();
  double end = std::numeric_limits<double>::infinity();
  for (const auto& ch : channels) {
    if (ch.timestamps.size() != ch.values.size()) {
      data_error("channel " + ch.channel_id + ": timestamp and value counts differ");
    }
    if (ch.timestamps.empty()) alignment_error("channel " + ch.channel_id + " is empty");
    for (std::size_t i = 1; i < ch.timestamps.size(); ++i) {
      if (!(ch.timestamps[i] > ch.timestamps[i - 1])) {
        data_error("channel " + ch.channel_id + ": timestamps not strictly increasing at index " +
                   std::to_string(i));
      }
    }
    start = std::max(start, ch.timestamps.front());
    end = std::min(end, ch.timestamps.back());
  }
  if (end < start) alignment_error("channels do not overlap in time");
  const auto samples = static_cast<std::size_t>(std::floor((end - start) / dt + 1e-9)) + 1;
  if (samples < 2) alignment_error("channel overlap shorter than two samples");

  const double tol = 1e-6 * dt;
  AlignResult result;
  result.set.t0_epoch = start;
  result.set.dt = dt;

  std::vector<Eigen::RowVectorXd> kept_values;
  std::vector<std::vector<Cell>> kept_cells;

  for (const auto& ch : channels) {
    const auto& ts = ch.timestamps;
    auto raw_cell = [&](std::size_t i) {
      const double v = ch.values[i];
      if (!std::isfinite(v)) return Cell::kGap;
      return plausible_hz(v) ? Cell::kGood : Cell::kImplausible;
    };

    Eigen::RowVectorXd row(static_cast<Eigen::Index>(samples));
    std::vector<Cell> cells(samples, Cell::kGap);
    for (std::size_t m = 0; m < samples; ++m) {
      const double t = start + static_cast<double>(m) * dt;
      const auto upper = std::upper_bound(ts.begin(), ts.end(), t + tol);
      const auto j = static_cast<std::size_t>(upper - ts.begin());
      // j >= 1 because t >= ts.front() on the intersection grid.
      const std::size_t i = j - 1;
      double v = kNaN;
      Cell c = Cell::kGap;
      if (std::abs(ts[i] - t) <= tol) {
        c = raw_cell(i);
        v = ch.values[i];
      } else if (j < ts.size()) {
        const Cell left = raw_cell(i);
        const Cell right = raw_cell(j);
        if (left == Cell::kGood && right == Cell::kGood) {
          const double w = (t - ts[i]) / (ts[j] - ts[i]);
          v = ch.values[i] + w * (ch.values[j] - ch.values[i]);
          c = Cell::kGood;
        } else {
          c = (left == Cell::kImplausible || right == Cell::kImplausible) ? Cell::kImplausible : Cell::kGap;
        }
      }
      row(static_cast<Eigen::Index>(m)) = v;
      cells[m] = c;
    }

    const auto bad = std::count_if(cells.begin(), cells.end(), [](Cell c) { return c != Cell::kGood; });
    const double bad_fraction = static_cast<double>(bad) / static_cast<double>(samples);
    if (bad_fraction > policy.drop_channel_threshold) {
      result.dropped_channels.push_back(ch.channel_id);
      continue;
    }

    // Fill interior gap runs bounded by good cells on both sides.
    std::size_t m = 0;
    while (m < samples) {
      if (cells[m] != Cell::kGap) {
        ++m;
        continue;
      }
      std::size_t run_end = m;
      while (run_end < samples && cells[run_end] == Cell::kGap) ++run_end;
      const std::size_t len = run_end - m;
      if (m > 0 && run_end < samples && cells[m - 1] == Cell::kGood && cells[run_end] == Cell::kGood &&
          len <= policy.interpolate_max_gap) {
        const double left = row(static_cast<Eigen::Index>(m - 1));
        const double right = row(static_cast<Eigen::Index>(run_end));
        for (std::size_t k = m; k < run_end; ++k) {
          const double w = static_cast<double>(k - (m - 1)) / static_cast<double>(len + 1);
          row(static_cast<Eigen::Index>(k)) = left + w * (right - left);
          cells[k] = Cell::kGood;
          ++result.filled_cells;
        }
      }
      m = run_end;
    }

    result.set.channel_ids.push_back(ch.channel_id);
    kept_values.push_back(std::move(row));
    kept_cells.push_back(std::move(cells));
  }

  if (kept_values.empty()) alignment_error("all channels dropped by the bad-data threshold");

  const auto n_rows = static_cast<Eigen::Index>(kept_values.size());
  const auto n_cols = static_cast<Eigen::Index>(samples);
  result.set.frame.resize(n_rows, n_cols);
  result.set.masked.resize(n_rows, n_cols);
  for (Eigen::Index n = 0; n < n_rows; ++n) {
    result.set.frame.row(n) = kept_values[static_cast<std::size_t>(n)];
    for (Eigen::Index m = 0; m < n_cols; ++m) {
      result.set.masked(n, m) = kept_cells[static_cast<std::size_t>(n)][static_cast<std::size_t>(m)] != Cell::kGood;
    }
  }
  return result;
}

std::vector<ChannelSeries> to_channels(const MeasurementSet& set) {
  std::vector<ChannelSeries> out;
  out.reserve(set.channels());
  for (std::size_t n = 0; n < set.channels(); ++n) {
    ChannelSeries ch;
    ch.channel_id = set.channel_ids[n];
    ch.timestamps.reserve(set.samples());
    ch.values.reserve(set.samples());
    for (std::size_t m = 0; m < set.samples(); ++m) {
      ch.timestamps.push_back(set.time_at(m));
      ch.values.push_back(set.usable(n, m) ? set.value(n, m) : kNaN);
    }
    out.push_back(std::move(ch));
  }
  return out;
}

QualityReport quality_report(const MeasurementSet& set) {
  QualityReport report;
  for (std::size_t n = 0; n < set.channels(); ++n) {
    ChannelQuality q;
    q.id = set.channel_ids[n];
    q.min_hz = std::numeric_limits<double>::infinity();
    q.max_hz = -std::numeric_limits<double>::infinity();
    std::size_t bad = 0;
    std::size_t run = 0;
    for (std::size_t m = 0; m < set.samples(); ++m) {
      if (!set.usable(n, m)) {
        ++bad;
        q.longest_gap = std::max(q.longest_gap, ++run);
      } else {
        run = 0;
      }
      const double v = set.value(n, m);
      if (std::isfinite(v)) {
        q.min_hz = std::min(q.min_hz, v);
        q.max_hz = std::max(q.max_hz, v);
        if (!plausible_hz(v)) q.in_band = false;
      }
    }
    if (q.min_hz > q.max_hz) q.min_hz = q.max_hz = kNaN;
    q.bad_fraction = set.samples() == 0 ? 0.0 : static_cast<double>(bad) / static_cast<double>(set.samples());
    report.pass = report.pass && q.in_band;
    report.channels.push_back(std::move(q));
  }
  return report;
}

}  // namespace coiest
