#include <doctest.h>

#include <limits>

#include "cwhom/errors.hpp"
#include "cwhom/rates.hpp"

using namespace cwhom;
using namespace cwhom::rates;

TEST_CASE("cw and pulsed anchors") {
  CHECK(cw_fourfold_rate(0.01, 100e-12, 100e-12) == doctest::Approx(1e6).epsilon(1e-14));
  CHECK(pulsed_rate(0.01, 165e-12, 165e-12, 1e9) == doctest::Approx(1e5).epsilon(1e-14));
  CHECK(cw_fourfold_rate(0.01, 100e-12, 100e-12, std::array<double, 4>{0.5, 0.5, 1, 1}, true) ==
        doctest::Approx(1.25e5));
}

TEST_CASE("cw rate homogeneity") {
  const double r = cw_fourfold_rate(0.01, 200e-12, 50e-12);
  CHECK(cw_fourfold_rate(0.03, 200e-12, 50e-12) == doctest::Approx(9.0 * r));
  CHECK(cw_fourfold_rate(0.01, 400e-12, 50e-12) == doctest::Approx(r / 4.0));
}

TEST_CASE("rates reject bad inputs") {
  CHECK_THROWS_AS(cw_fourfold_rate(0.0, 1e-10, 1e-10), ValidationError);
  CHECK_THROWS_AS(cw_fourfold_rate(0.01, 1e-10, 1e-10, std::array<double, 4>{1, 1, 1, 2}), ValidationError);
  CHECK_THROWS_AS(pulsed_rate(0.01, 1e-10, 1e-10, 0.0), ValidationError);
}

TEST_CASE("pass swaps on a constant profile") {
  LossProfile p{{0.0, 100.0, 600.0}, {{10, 10, 0, 0}, {10, 10, 0, 0}, {10, 10, 0, 0}}};
  const double r = cw_fourfold_rate(0.01, 800e-12, 50e-12, std::array<double, 4>{0.1, 0.1, 1, 1}, true);
  CHECK(pass_swaps(p, 0.01, 800e-12, 50e-12) == doctest::Approx(600.0 * r).epsilon(1e-14));
  // halving the duration halves the count
  LossProfile h{{0.0, 300.0}, {{10, 10, 0, 0}, {10, 10, 0, 0}}};
  CHECK(pass_swaps(h, 0.01, 800e-12, 50e-12) == doctest::Approx(300.0 * r));
  const double inf = std::numeric_limits<double>::infinity();
  LossProfile dark{{0.0, 1.0}, {{inf, 0, 0, 0}, {inf, 0, 0, 0}}};
  CHECK(pass_swaps(dark, 0.01, 800e-12, 50e-12) == 0.0);
  LossProfile unsorted{{1.0, 0.0}, {{0, 0, 0, 0}, {0, 0, 0, 0}}};
  CHECK_THROWS_AS(pass_swaps(unsorted, 0.01, 8e-10, 5e-11), ValidationError);
  CHECK(db_to_eta(10.0) == doctest::Approx(0.1));
}

TEST_CASE("minimum coherence time is bisection-tight") {
  RateQuery q;
  q.jitter = 15e-12;
  const auto s = min_coherence_time(q, 50e-12);
  REQUIRE(s.has_value());
  using interference::identical_source_visibility;
  CHECK(identical_source_visibility(s->tc, 50e-12, q.jitter, q.model) >= q.v_target);
  CHECK(identical_source_visibility(s->tc * (1.0 - q.tolerance), 50e-12, q.jitter, q.model) < q.v_target);
}

TEST_CASE("optimizer is reproducible with an interior maximum") {
  RateQuery q;
  q.n_samples = 12;
  const auto a = optimize_window(q, 1), b = optimize_window(q, 2);
  REQUIRE(a.curve.size() == b.curve.size());
  for (std::size_t k = 0; k < a.curve.size(); ++k) CHECK(a.curve[k].rate == b.curve[k].rate);
  CHECK(a.curve.front().rate < a.rate_opt);
  CHECK(a.curve.back().rate < a.rate_opt);
}

TEST_CASE("infeasible target") {
  RateQuery q;
  q.v_target = 0.999;
  q.tc_max = 50e-12;
  q.jitter = 50e-12;
  CHECK_THROWS_AS(optimize_window(q), ValidationError);
}
