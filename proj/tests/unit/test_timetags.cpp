#include <doctest.h>

#include "cwhom/errors.hpp"
#include "cwhom/timetags.hpp"

using namespace cwhom;
using namespace cwhom::timetags;

namespace {

interference::CoincidenceConfig cfg(double t14, double t23) {
  interference::CoincidenceConfig c;
  c.tau_14 = t14;
  c.tau_23 = t23;
  return c;
}

TagStream stream(std::vector<TagEvent> ev, double duration = 1e-6) {
  std::sort(ev.begin(), ev.end(), [](auto& a, auto& b) { return a.timestamp_fs < b.timestamp_fs; });
  return {ev, duration};
}

}  // namespace

TEST_CASE("a hand-built fourfold is counted once") {
  // 1 at 100 ns, 2' and 3' within +-1 ns, 4 at +10 ps
  const auto s = stream({{1, 100'000'000}, {2, 100'300'000}, {3, 99'500'000}, {4, 100'010'000}});
  CHECK(count_fourfolds(s, cfg(40e-12, 2e-9), 0.0) == 1);
  // channel 4 outside +-20 ps
  CHECK(count_fourfolds(s, cfg(40e-12, 2e-9), 50e-12) == 0);
  CHECK(count_fourfolds(s, cfg(40e-12, 0.5e-9), 0.0) == 0);
}

TEST_CASE("empty stream gives zero counts") {
  const auto c = count_with_accidentals(stream({}), cfg(40e-12, 2e-9), 0.0, 40e-9);
  CHECK(c.raw == 0);
  CHECK(c.shifted_2 == 0);
  CHECK(c.shifted_3 == 0);
  CHECK(c.corrected == 0);
}

TEST_CASE("shift must clear the window") {
  CHECK_THROWS_AS(shifted_accidentals(stream({}), cfg(40e-12, 2e-9), 5e-9, 2), ValidationError);
  CHECK_THROWS_AS(shifted_accidentals(stream({}), cfg(40e-12, 2e-9), 40e-9, 4), ValidationError);
}

TEST_CASE("streams are validated") {
  TagStream s{{{1, 10}, {2, 5}}, 1e-6};
  CHECK_THROWS_AS(s.validate(), ValidationError);
  TagStream bad{{{5, 10}}, 1e-6};
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("simulation is deterministic and sorted") {
  SimScenario s;
  s.pair_rate_a = s.pair_rate_b = 2e6;
  s.noise_rates = {1e5, 1e5, 1e5, 1e5};
  s.duration = 2e-3;
  s.rng_seed = 9;
  const auto a = simulate_streams(s), b = simulate_streams(s);
  CHECK(a.events == b.events);
  CHECK_NOTHROW(a.validate());
  s.rng_seed = 10;
  CHECK(simulate_streams(s).events != a.events);
}

TEST_CASE("singles follow the rates") {
  SimScenario s;
  s.pair_rate_a = 1e6;
  s.pair_rate_b = 0.0;
  s.etas = {0.5, 1.0, 1.0, 1.0};
  s.noise_rates = {0.0, 0.0, 0.0, 2e5};
  s.duration = 0.05;
  const auto n = simulate_streams(s).singles();
  CHECK(static_cast<double>(n[0]) == doctest::Approx(2.5e4).epsilon(0.03));
  // A's beam-splitter photon goes either way
  CHECK(static_cast<double>(n[1] + n[2]) == doctest::Approx(5e4).epsilon(0.03));
  CHECK(static_cast<double>(n[3]) == doctest::Approx(1e4).epsilon(0.05));
}

TEST_CASE("counting is thread-count independent") {
  SimScenario s;
  s.pair_rate_a = s.pair_rate_b = 5e6;
  s.noise_rates = {2e6, 2e6, 2e6, 2e6};
  s.duration = 5e-3;
  const auto st = simulate_streams(s);
  const auto c = cfg(1e-9, 2e-9);
  CHECK(count_fourfolds(st, c, 0.0, 1) == count_fourfolds(st, c, 0.0, 3));
}

TEST_CASE("accidental algebra limits") {
  AccidentalParams p;
  p.mu_c1 = p.mu_c2 = 1e-3;
  p.eta = {0.5, 0.9, 0.9, 0.9};
  p.gamma = 0.0;
  const auto noiseless = analytic_accidentals(p);
  CHECK(noiseless.as2 == 0.0);
  CHECK(noiseless.as3 == 0.0);
  CHECK(noiseless.a0 == doctest::Approx(1e-6 * 0.5 * 0.9 * 0.9 * 0.9));
  p.gamma = 1.0;
  // perfect bunching and no noise: nothing
  CHECK(analytic_accidentals(p).a0 == 0.0);
  p.p_noise = {0.01, 0.02, 0.02, 0.0};
  const auto t = analytic_accidentals(p);
  CHECK(t.p_real == doctest::Approx(0.0).epsilon(1e-18));
  CHECK(t.a0 == doctest::Approx(t.as2 + t.as3));
  CHECK(eta_bar(0.5) == doctest::Approx(0.75));
}

TEST_CASE("per-window parameters from a simulation scenario") {
  SimScenario s;
  s.pair_rate_a = 1e6;
  s.pair_rate_b = 3e6;
  s.noise_rates = {1e5, 2e5, 3e5, 4e5};
  s.etas = {1.0, 0.5, 0.5, 1.0};
  const auto c = cfg(1e-9, 2e-9);
  const auto p = accidental_params_for(s, c);
  CHECK(p.mu_c1 == doctest::Approx(1e-3));
  CHECK(p.mu_c2 == doctest::Approx(3e-3));
  CHECK(p.p_noise[0] == doctest::Approx(1e-4));
  CHECK(p.p_noise[1] == doctest::Approx((2e5 + 2e6 * 0.5) * 2e-9));
  CHECK(effective_windows(1.0, c) == doctest::Approx(1e9));
}
