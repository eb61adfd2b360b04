#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "cwhom/errors.hpp"
#include "cwhom/io.hpp"
#include "cwhom/scenario.hpp"

using namespace cwhom;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "cwhom_unit";
  fs::create_directories(dir);
  return dir / name;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_CASE("scenario defaults") {
  const auto s = scenario::parse(io::Json::object(), ".");
  CHECK(s.tau14.size() == 1);
  CHECK(s.tau14[0] == doctest::Approx(40e-12));
  CHECK(s.tau23 == doctest::Approx(2e-9));
  CHECK(s.delays.size() == 121);
  CHECK(s.detectors.jitter_fwhm[0] == doctest::Approx(17e-12));
}

TEST_CASE("unknown keys are rejected at every level") {
  using J = io::Json;
  CHECK_THROWS_AS(scenario::parse(J{{"windws", J::object()}}, "."), ValidationError);
  CHECK_THROWS_AS(scenario::parse(J{{"windows", {{"tau14", 40}}}}, "."), ValidationError);
  CHECK_THROWS_AS(scenario::parse(J{{"sources", {{"a", {{"filter", "rect"}, {"tc", 1}}}}}}, "."), ValidationError);
  CHECK_THROWS_AS(scenario::parse(J{{"detectors", {{"jitter_ps", {1, 2, 3}}}}}, "."), ValidationError);
  CHECK_THROWS_AS(scenario::parse(J{{"windows", {{"tau23_ps", -1}}}}, "."), ValidationError);
  CHECK_THROWS_AS(scenario::parse(J{{"windows", {{"tau23_ps", "long"}}}}, "."), ValidationError);
}

TEST_CASE("tagger jitter adds in quadrature") {
  const auto s = scenario::parse(io::Json{{"detectors", {{"jitter_ps", {3, 3, 3, 3}}, {"tagger_rms_ps", 0.0}}}}, ".");
  CHECK(s.detectors.jitter_fwhm[1] == doctest::Approx(3e-12));
}

TEST_CASE("tag csv round trip") {
  const auto p = scratch("tags.csv");
  timetags::TagStream s{{{1, 5}, {4, 7}, {2, 1000}}, 1e-9};
  io::write_tags(p, s);
  const auto r = io::read_tags(p);
  CHECK(r.events == s.events);
  write(p, "channel,timestamp_fs\n7,10\n");
  CHECK_THROWS_AS(io::read_tags(p), ValidationError);
}

TEST_CASE("loss profile accepts inf") {
  const auto p = scratch("loss.csv");
  write(p, "t_s,loss1_db,loss2_db,loss3_db,loss4_db\n0,1,2,3,inf\n10,1,2,3,4\n");
  const auto l = io::read_loss_profile(p);
  CHECK(l.t.size() == 2);
  CHECK(std::isinf(l.loss[0][3]));
  write(p, "t,loss1_db\n0,1\n");
  CHECK_THROWS_AS(io::read_loss_profile(p), ValidationError);
}

TEST_CASE("reflectance csv round trip keeps frequency order") {
  const auto p = scratch("r.csv");
  std::vector<spectral::ReflectanceSample> s{{-2e10, 0.1}, {0.0, 0.9}, {3e10, 0.2}};
  io::write_reflectance(p, s);
  const auto r = io::read_reflectance(p);
  REQUIRE(r.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(r[k].omega == doctest::Approx(s[k].omega).epsilon(1e-9));
    CHECK(r[k].reflectance == doctest::Approx(s[k].reflectance));
  }
}

TEST_CASE("fbg model json round trip") {
  spectral::FbgModel m;
  m.order = std::numeric_limits<double>::infinity();
  m.detuning_offset = 1.5e9;
  const auto back = io::fbg_model_from_json(io::to_json(m));
  CHECK(std::isinf(back.order));
  CHECK(back.detuning_offset == m.detuning_offset);
  CHECK_THROWS_AS(io::fbg_model_from_json(io::Json{{"length_m", 0.01}, {"peak_kappa_per_m", 1}, {"x", 1}}),
                  ValidationError);
}

TEST_CASE("output formatting") {
  CHECK(io::format_double(0.1) == "0.1");
  CHECK(io::to_ps(250e-12) == 250.0);
}
