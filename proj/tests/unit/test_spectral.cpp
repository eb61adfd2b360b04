#include <doctest.h>

#include <cmath>
#include <numeric>

#include "cwhom/errors.hpp"
#include "cwhom/interference.hpp"
#include "cwhom/spectral.hpp"

using namespace cwhom;
using namespace cwhom::spectral;

TEST_CASE("grid is symmetric with zero on a node") {
  const FrequencyGrid g(101, 5.0);
  CHECK(g.node(0) == doctest::Approx(-5.0));
  CHECK(g.node(50) == doctest::Approx(0.0));
  CHECK(g.node(100) == doctest::Approx(5.0));
  for (long m = 0; m < g.size(); ++m) CHECK(g.node(g.mirror(m)) == doctest::Approx(-g.node(m)));
}

TEST_CASE("rect filter integrates to its width") {
  const double w = pm_to_angular(40.0);
  const FrequencyGrid g(1001, 4.0 * w);
  const auto f = make_filter(FilterKind::Rect, w, g);
  double area = 0.0;
  for (const auto& a : f.amp) area += std::norm(a) * g.step();
  CHECK(area == doctest::Approx(w).epsilon(1e-12));
}

TEST_CASE("gaussian and lorentzian filters have the requested FWHM") {
  const double w = pm_to_angular(30.0);
  const FrequencyGrid g(4001, 10.0 * w);
  CHECK(power_fwhm(make_filter(FilterKind::Gaussian, w, g)) == doctest::Approx(w).epsilon(1e-3));
  CHECK(power_fwhm(make_filter(FilterKind::Lorentzian, w, g)) == doctest::Approx(w).epsilon(1e-3));
}

TEST_CASE("filter width for a coherence time round-trips") {
  for (auto kind : {FilterKind::Rect, FilterKind::Gaussian}) {
    const double tc = 165e-12;
    const double w = filter_fwhm_for_coherence_time(kind, tc);
    const auto g = plan_grid({w, w, 8.0 * tc});
    const auto f = make_filter(kind, w, g);
    const auto jsa = joint_spectral_amplitude(f, f);
    CHECK(interference::coherence_time(jsa) == doctest::Approx(tc).epsilon(5e-3));
  }
}

TEST_CASE("unknown filter kind is rejected") {
  CHECK_THROWS_AS(parse_filter_kind("boxcar"), ValidationError);
  CHECK(to_string(parse_filter_kind("gaussian")) == "gaussian");
}

TEST_CASE("coarse grid refuses long time scales") {
  const FrequencyGrid g(101, 1e12);
  CHECK_THROWS_AS(check_resolution(g, 1e-9), ResolutionError);
  try {
    check_resolution(g, 1e-9);
  } catch (const ResolutionError& e) {
    CHECK(e.required_n_points() > 101);
  }
  CHECK_NOTHROW(check_resolution(g, 1e-13));
}

TEST_CASE("planned grid honours resolution and nodes per FWHM") {
  const double w = pm_to_angular(40.0);
  const auto g = plan_grid({w, 0.25 * w, 2e-9, 8.0, 513, 32.0});
  CHECK(g.step() <= max_step_for(2e-9));
  CHECK(0.25 * w / g.step() >= 32.0);
  CHECK(g.size() % 2 == 1);
}

TEST_CASE("uniform grating reaches tanh^2(kappa L) at line centre") {
  FbgModel m;
  m.order = std::numeric_limits<double>::infinity();
  m.width_fraction = 1.0;
  m.peak_kappa = 40.0;
  m.length = 0.05;
  const std::vector<double> w{0.0};
  CHECK(fbg_reflectance(m, w)[0] == doctest::Approx(std::pow(std::tanh(2.0), 2)).epsilon(1e-9));
}

TEST_CASE("lossless grating conserves power") {
  const auto m = design_fbg(pm_to_angular(40.0), FbgShape{});
  const FrequencyGrid g(401, pm_to_angular(200.0));
  const auto s = fbg_spectrum(m, g);
  for (long k = 0; k < g.size(); ++k)
    CHECK(std::norm(s.reflection.at(k)) + std::norm(s.transmission.at(k)) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("designed grating has the target bandwidth") {
  for (double pm : {27.0, 41.0, 44.0}) {
    const auto m = design_fbg(pm_to_angular(pm), FbgShape{});
    CHECK(angular_to_pm(fbg_fwhm(m)) == doctest::Approx(pm).epsilon(1e-6));
  }
}

TEST_CASE("photon filter response has no mean group delay") {
  const auto m = design_fbg(pm_to_angular(40.0), FbgShape{});
  const FrequencyGrid g(801, pm_to_angular(80.0));
  const auto r = fbg_response(m, g);
  // Weighted phase slope across the band is ~0 after the delay removal.
  double num = 0.0, den = 0.0;
  for (long k = 0; k + 1 < g.size(); ++k) {
    const auto z = r.at(k + 1) * std::conj(r.at(k));
    num += std::abs(z) * std::arg(z);
    den += std::abs(z);
  }
  CHECK(std::abs(num / den / g.step()) < 1e-15);
}

TEST_CASE("fit recovers a grating from its own lobe") {
  const double w = pm_to_angular(35.0);
  const auto truth = design_fbg(w, FbgShape{});
  std::vector<double> om(121);
  for (std::size_t k = 0; k < om.size(); ++k) om[k] = -2.0 * w + 4.0 * w * k / (om.size() - 1);
  const auto r = fbg_reflectance(truth, om);
  std::vector<ReflectanceSample> s;
  for (std::size_t k = 0; k < om.size(); ++k) s.push_back({om[k], r[k]});
  const auto seed = design_fbg(1.2 * w, FbgShape{4.0, 2.5, 0.7});
  FitOptions opt;
  opt.restarts = 1;
  const auto fit = fit_fbg(s, seed, opt);
  CHECK(fit.residual <= fit.seed_residual);
  CHECK(fit.residual < 1e-3 * fit.seed_residual);
  CHECK(angular_to_pm(fbg_fwhm(fit.model)) == doctest::Approx(35.0).epsilon(5e-3));
}

TEST_CASE("grating validation") {
  FbgModel m;
  m.length = -1.0;
  CHECK_THROWS_AS(m.validate(), ValidationError);
  m = FbgModel{};
  m.width_fraction = 1.5;
  CHECK_THROWS_AS(m.validate(), ValidationError);
  m = FbgModel{};
  m.peak_kappa = 0.0;
  CHECK_NOTHROW(m.validate());
}

TEST_CASE("joint amplitude is normalized to unit peak") {
  const FrequencyGrid g(201, 10.0);
  const auto f = make_filter(FilterKind::Gaussian, 3.0, g);
  const auto j = joint_spectral_amplitude(f, f);
  CHECK(j.max_modulus() == doctest::Approx(1.0));
  const auto raw = joint_spectral_amplitude(f, f, std::nullopt, false);
  CHECK(std::abs(raw.values[100]) == doctest::Approx(1.0));
}
