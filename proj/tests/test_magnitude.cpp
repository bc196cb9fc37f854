#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "coiest/error.hpp"
#include "coiest/magnitude.hpp"

using namespace coiest;

namespace {

InertiaTable parse(const std::string& text) {
  std::istringstream in(text);
  return parse_inertia_csv(in);
}

}  // namespace

TEST_CASE("system_inertia") {
  InertiaTable t{{{"G1", 4.0, 500.0, true}, {"G2", 5.0, 1000.0, true}}};
  CHECK(system_inertia(t) == 7000.0);
  t.units[1].committed = false;
  CHECK(system_inertia(t) == 2000.0);
  CHECK(system_inertia(InertiaTable{{{"G", 3.0, 100.0, true}}}) == 300.0);
  t.units[0].committed = false;
  try {
    system_inertia(t);
    FAIL("expected empty fleet");
  } catch (const Error& e) {
    CHECK(e.code() == "empty_fleet");
  }
}

TEST_CASE("estimate_event_mw") {
  const auto m = estimate_event_mw(600000.0, 0.05, 60.0);
  CHECK(m.p_event_mw == doctest::Approx(1000.0).epsilon(1e-14));
  CHECK(m.i_sys_mws == 600000.0);
  CHECK(m.rocof_used_hz_s == 0.05);
  CHECK(m.f_nominal_hz == 60.0);
  CHECK(estimate_event_mw(600000.0, 0.0, 60.0).p_event_mw == 0.0);
  CHECK(m.p_event_mw == 2.0 * m.i_sys_mws / m.f_nominal_hz * m.rocof_used_hz_s);
  CHECK_THROWS_AS(estimate_event_mw(600000.0, 0.05, 0.0), Error);
  CHECK_THROWS_AS(estimate_event_mw(600000.0, -0.05, 60.0), Error);
  CHECK_THROWS_AS(estimate_event_mw(0.0, 0.05, 60.0), Error);
}

TEST_CASE("estimate_event_mw is linear in inertia and rocof") {
  for (double i : {1e3, 7.5e4, 6e5}) {
    for (double r : {1e-4, 0.03, 0.9}) {
      const double p = estimate_event_mw(i, r, 50.0).p_event_mw;
      CHECK(estimate_event_mw(3.0 * i, r, 50.0).p_event_mw == doctest::Approx(3.0 * p).epsilon(1e-14));
      CHECK(estimate_event_mw(i, 0.25 * r, 50.0).p_event_mw == doctest::Approx(0.25 * p).epsilon(1e-14));
      CHECK(estimate_event_mw(i, r + 0.01, 50.0).p_event_mw ==
            doctest::Approx(p + estimate_event_mw(i, 0.01, 50.0).p_event_mw).epsilon(1e-13));
    }
  }
}

TEST_CASE("inertia CSV") {
  const auto t = parse("unit_id,h_s,cap_mva,committed\nG1,4,500,1\nG2,5,1000,false\n# note\nG3,3.5,250,true\n");
  REQUIRE(t.units.size() == 3);
  CHECK(t.units[1].committed == false);
  CHECK(t.units[2].committed == true);
  CHECK(system_inertia(t) == 2000.0 + 875.0);
  std::ostringstream out;
  emit_inertia_csv(t, out);
  const auto back = parse(out.str());
  REQUIRE(back.units.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back.units[i].unit_id == t.units[i].unit_id);
    CHECK(back.units[i].h == t.units[i].h);
    CHECK(back.units[i].cap == t.units[i].cap);
    CHECK(back.units[i].committed == t.units[i].committed);
  }
  CHECK_THROWS_AS(parse("unit,h,cap,committed\nG1,4,500,1\n"), Error);
  CHECK_THROWS_AS(parse("unit_id,h_s,cap_mva,committed\nG1,0,500,1\n"), Error);
  CHECK_THROWS_AS(parse("unit_id,h_s,cap_mva,committed\nG1,4,-5,1\n"), Error);
  CHECK_THROWS_AS(parse("unit_id,h_s,cap_mva,committed\nG1,4,500,maybe\n"), Error);
}
