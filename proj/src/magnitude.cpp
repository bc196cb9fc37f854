#include "coiest/magnitude.hpp"

#include <cmath>
#include <istream>
#include <ostream>

#include "coiest/error.hpp"
#include "text_util.hpp"

namespace coiest {
namespace {

constexpr const char* kModule = "magnitude";

[[noreturn]] void format_error(const std::string& msg) {
  throw Error(ErrorKind::kData, "format", kModule, msg);
}

}  // namespace

InertiaTable parse_inertia_csv(std::istream& in) {
  InertiaTable table;
  bool have_header = false;
  std::size_t row = 0;
  std::string line;
  while (std::getline(in, line)) {
    const std::string_view view = detail::trim(line);
    if (view.empty() || view.front() == '#') continue;
    const auto fields = detail::split_fields(view);
    if (!have_header) {
      if (fields.size() != 4 || fields[0] != "unit_id" || fields[1] != "h_s" || fields[2] != "cap_mva" ||
          fields[3] != "committed") {
        format_error("inertia header must be 'unit_id,h_s,cap_mva,committed'");
      }
      have_header = true;
      continue;
    }
    ++row;
    const std::string where = "inertia row " + std::to_string(row);
    if (fields.size() != 4) format_error(where + ": expected 4 fields");
    InertiaUnit unit;
    unit.unit_id = std::string(fields[0]);
    const auto h = detail::parse_double(fields[1]);
    const auto cap = detail::parse_double(fields[2]);
    if (!h || !(*h > 0.0)) format_error(where + ": h_s must be a positive number");
    if (!cap || !(*cap > 0.0)) format_error(where + ": cap_mva must be a positive number");
    unit.h = *h;
    unit.cap = *cap;
    const std::string_view c = fields[3];
    if (c == "1" || c == "true") {
      unit.committed = true;
    } else if (c == "0" || c == "false") {
      unit.committed = false;
    } else {
      format_error(where + ": committed must be one of 0, 1, true, false");
    }
    table.units.push_back(std::move(unit));
  }
  if (!have_header) format_error("missing inertia header");
  return table;
}

void emit_inertia_csv(const InertiaTable& table, std::ostream& out) {
  out << "unit_id,h_s,cap_mva,committed\n";
  for (const auto& u : table.units) {
    out << u.unit_id << ',' << detail::format_double(u.h) << ',' << detail::format_double(u.cap) << ','
        << (u.committed ? 1 : 0) << '\n';
  }
}

double system_inertia(const InertiaTable& table) {
  double total = 0.0;
  bool any = false;
  for (const auto& u : table.units) {
    if (!(u.h > 0.0) || !(u.cap > 0.0)) {
      throw Error(ErrorKind::kData, "data", kModule, "unit " + u.unit_id + " has non-positive H or capacity");
    }
    if (!u.committed) continue;
    total += u.h * u.cap;
    any = true;
  }
  if (!any) throw Error(ErrorKind::kData, "empty_fleet", kModule, "no committed units");
  return total;
}

EventMagnitude estimate_event_mw(double i_sys_mws, double rocof_hz_s, double f_nominal_hz) {
  if (!(f_nominal_hz > 0.0)) throw Error(ErrorKind::kUsage, "invalid_argument", kModule, "f_nominal must be positive");
  if (!(i_sys_mws > 0.0)) throw Error(ErrorKind::kUsage, "invalid_argument", kModule, "system inertia must be positive");
  if (!(rocof_hz_s >= 0.0) || !std::isfinite(rocof_hz_s)) {
    throw Error(ErrorKind::kUsage, "invalid_argument", kModule, "rocof must be a finite magnitude (>= 0)");
  }
  EventMagnitude m;
  m.i_sys_mws = i_sys_mws;
  m.rocof_used_hz_s = rocof_hz_s;
  m.f_nominal_hz = f_nominal_hz;
  m.p_event_mw = (2.0 * i_sys_mws / f_nominal_hz) * rocof_hz_s;
  return m;
}

}  // namespace coiest
