#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace coiest {

struct InertiaUnit {
  std::string unit_id;
  double h = 0.0;    // inertia constant, s
  double cap = 0.0;  // rated capacity, MVA
  bool committed = true;
};

struct InertiaTable {
  std::vector<InertiaUnit> units;
};

/// Generation-load imbalance implied by a RoCoF on a known inertia.
struct EventMagnitude {
  double p_event_mw = 0.0;
  double i_sys_mws = 0.0;
  double rocof_used_hz_s = 0.0;
  double f_nominal_hz = 60.0;
};

/// Reads `unit_id,h_s,cap_mva,committed`; committed is 0/1/true/false.
InertiaTable parse_inertia_csv(std::istream& in);
void emit_inertia_csv(const InertiaTable& table, std::ostream& out);

/// Sum of H * Cap over committed units, MW*s.
double system_inertia(const InertiaTable& table);

/// P = 2 I / f_N * rocof. `rocof` is the magnitude of the decline.
EventMagnitude estimate_event_mw(double i_sys_mws, double rocof_hz_s, double f_nominal_hz);

}  // namespace coiest
