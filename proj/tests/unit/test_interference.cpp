#include <doctest.h>

#include <cmath>

#include "cwhom/errors.hpp"
#include "cwhom/interference.hpp"

using namespace cwhom;
using namespace cwhom::interference;

namespace {

InterferenceSetup small_setup(double tau14, double tau23, double jitter, spectral::FilterKind kind) {
  VisibilityModel m;
  m.filter = kind;
  m.bs_window_factor = tau23 / 165e-12;
  auto s = identical_source_setup(165e-12, tau14, jitter, m);
  return s;
}

}  // namespace

TEST_CASE("identical rect sources, 40 ps trigger window") {
  const double v = identical_source_visibility(165e-12, 40e-12, 15e-12);
  CHECK(v > 0.95);
  CHECK(v < 1.0);
}

TEST_CASE("probability is real, positive and even in tau for identical sources") {
  const FourfoldEngine e(small_setup(80e-12, 1320e-12, 17e-12, spectral::FilterKind::Rect));
  for (double tau : {0.0, 50e-12, 150e-12}) {
    CHECK(e.probability(tau) > 0.0);
    CHECK(e.imaginary_residue(tau) < 1e-9);
    CHECK(e.probability(tau) == doctest::Approx(e.probability(-tau)).epsilon(1e-9));
  }
  // bunching dips below the distinguishable level at zero delay
  CHECK(e.probability(0.0) < e.distinguishable(0.0));
}

TEST_CASE("fast sum agrees with the time-domain oracle") {
  const auto s = small_setup(40e-12, 1320e-12, 17e-12, spectral::FilterKind::Rect);
  const double f = fourfold_probability(s, 30e-12);
  const double o = fourfold_probability_oracle(s, 30e-12);
  CHECK(o == doctest::Approx(f).epsilon(1e-3));
}

TEST_CASE("plateau flagged when the beam-splitter window is short") {
  const auto s = small_setup(80e-12, 280e-12, 17e-12, spectral::FilterKind::Rect);
  const auto c = hom_curve(s, {0.0, 100e-12});
  CHECK_FALSE(c.reliable);
  CHECK_THROWS_AS(visibility(c), UnreliablePlateauError);
}

TEST_CASE("hom curve threads give identical values") {
  const auto s = small_setup(40e-12, 1320e-12, 0.0, spectral::FilterKind::Gaussian);
  std::vector<double> d;
  for (int k = -10; k <= 10; ++k) d.push_back(k * 30e-12);
  const auto a = hom_curve(s, d, 1), b = hom_curve(s, d, 3);
  CHECK(a.values == b.values);
  CHECK(a.plateau == b.plateau);
}

TEST_CASE("visibility falls as the trigger window grows") {
  double last = 1.0;
  for (double t14 : {20e-12, 80e-12, 320e-12}) {
    const double v = identical_source_visibility(165e-12, t14, 0.0);
    CHECK(v < last);
    last = v;
  }
}

TEST_CASE("visibility map matches point evaluations") {
  const auto m = visibility_map({100e-12, 200e-12}, {50e-12, 100e-12}, 20e-12, {}, 2);
  REQUIRE(m.v.size() == 4);
  CHECK(m.at(1, 0) == doctest::Approx(identical_source_visibility(200e-12, 50e-12, 20e-12)));
}

TEST_CASE("coherence function needs both half-maximum crossings") {
  const spectral::FrequencyGrid g(513, 1e12);
  const auto f = spectral::make_filter(spectral::FilterKind::Gaussian, 1e11, g);
  const auto jsa = spectral::joint_spectral_amplitude(f, f);
  CHECK_THROWS_AS(coherence_function(jsa, 0, 0, symmetric_delays(1e-13, 5)), ValidationError);
  const double tc = coherence_time(jsa);
  // jitter only broadens
  CHECK(coherence_time(jsa, 30e-12, 30e-12) > tc);
}

TEST_CASE("windows are validated") {
  CoincidenceConfig c;
  c.tau_14 = 0.0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
}
