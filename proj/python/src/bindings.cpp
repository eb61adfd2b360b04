// Python bindings. Everything is SI (s, rad/s, 1/s) like the C++ core;
// the scenario-file conveniences take the same JSON the CLI reads.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "cwhom/errors.hpp"
#include "cwhom/interference.hpp"
#include "cwhom/io.hpp"
#include "cwhom/rates.hpp"
#include "cwhom/scenario.hpp"
#include "cwhom/spectral.hpp"
#include "cwhom/timetags.hpp"

namespace py = pybind11;
using namespace cwhom;

namespace {

// nlohmann <-> python through the json module; the documents are small.
py::object to_py(const io::Json& j) { return py::module_::import("json").attr("loads")(j.dump()); }
io::Json from_py(const py::object& o) {
  return io::Json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

spectral::FilterKind kind_of(const std::string& s) { return spectral::parse_filter_kind(s); }

interference::VisibilityModel vis_model(const std::string& filter, double bs_window_factor) {
  interference::VisibilityModel m;
  m.filter = kind_of(filter);
  m.bs_window_factor = bs_window_factor;
  return m;
}

interference::CoincidenceConfig windows(double tau_14, double tau_23) {
  interference::CoincidenceConfig c;
  c.tau_14 = tau_14;
  c.tau_23 = tau_23;
  c.validate();
  return c;
}

timetags::TagStream make_stream(const std::vector<int>& channels, const std::vector<std::int64_t>& t_fs,
                                double duration) {
  if (channels.size() != t_fs.size()) throw ValidationError("channels and timestamps differ in length");
  timetags::TagStream s;
  s.duration = duration;
  s.events.reserve(channels.size());
  for (std::size_t k = 0; k < channels.size(); ++k) s.events.push_back({channels[k], t_fs[k]});
  s.validate();
  return s;
}

py::dict hom_dict(const interference::HomCurve& c) {
  py::dict d;
  d["delays"] = c.delays;
  d["values"] = c.values;
  d["distinguishable"] = c.distinguishable;
  d["plateau"] = c.plateau;
  d["dip"] = c.dip;
  d["reliable"] = c.reliable;
  d["visibility"] = c.reliable ? py::object(py::float_(interference::visibility(c))) : py::object(py::none());
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "CW multi-photon HOM interference: spectral model, four-photon sums, time tags and rates";

  auto base = py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<ResolutionError>(m, "ResolutionError", PyExc_RuntimeError);
  py::register_exception<UnreliablePlateauError>(m, "UnreliablePlateauError", PyExc_RuntimeError);
  py::register_exception<InvalidModelError>(m, "InvalidModelError", PyExc_RuntimeError);
  (void)base;

  // -- spectral
  py::class_<spectral::FrequencyGrid>(m, "FrequencyGrid")
      .def(py::init<long, double>(), py::arg("n_points"), py::arg("span"))
      .def_property_readonly("size", &spectral::FrequencyGrid::size)
      .def_property_readonly("span", &spectral::FrequencyGrid::span)
      .def_property_readonly("step", &spectral::FrequencyGrid::step)
      .def("nodes", &spectral::FrequencyGrid::nodes);

  m.def(
      "make_filter",
      [](const std::string& kind, double fwhm, const spectral::FrequencyGrid& g) {
        return spectral::make_filter(kind_of(kind), fwhm, g).amp;
      },
      py::arg("kind"), py::arg("fwhm"), py::arg("grid"), "Complex filter amplitude on the grid (fwhm in rad/s).");
  m.def("filter_fwhm_for_coherence_time",
        [](const std::string& kind, double tc) { return spectral::filter_fwhm_for_coherence_time(kind_of(kind), tc); },
        py::arg("kind"), py::arg("coherence_time"));

  py::class_<spectral::FbgModel>(m, "FbgModel")
      .def(py::init<>())
      .def_readwrite("length", &spectral::FbgModel::length)
      .def_readwrite("n_sections", &spectral::FbgModel::n_sections)
      .def_readwrite("peak_kappa", &spectral::FbgModel::peak_kappa)
      .def_readwrite("order", &spectral::FbgModel::order)
      .def_readwrite("width_fraction", &spectral::FbgModel::width_fraction)
      .def_readwrite("detuning_offset", &spectral::FbgModel::detuning_offset)
      .def_readwrite("design_wavelength", &spectral::FbgModel::design_wavelength)
      .def_readwrite("effective_index", &spectral::FbgModel::effective_index)
      .def("to_dict", [](const spectral::FbgModel& f) { return to_py(io::to_json(f)); })
      .def_static("from_dict", [](const py::object& o) { return io::fbg_model_from_json(from_py(o)); });

  m.def(
      "design_fbg",
      [](double fwhm, double kappa_length, double order, double width_fraction, int n_sections) {
        return spectral::design_fbg(fwhm, spectral::FbgShape{kappa_length, order, width_fraction, n_sections});
      },
      py::arg("fwhm"), py::arg("kappa_length") = 5.0, py::arg("order") = 2.0, py::arg("width_fraction") = 0.8,
      py::arg("n_sections") = 200);
  m.def("fbg_fwhm", &spectral::fbg_fwhm, py::arg("model"));
  m.def(
      "fbg_reflectance",
      [](const spectral::FbgModel& f, const std::vector<double>& omega) { return spectral::fbg_reflectance(f, omega); },
      py::arg("model"), py::arg("omega"));
  m.def(
      "fit_fbg",
      [](const std::vector<double>& omega, const std::vector<double>& refl, const spectral::FbgModel& seed,
         int restarts, std::uint64_t rng_seed) {
        if (omega.size() != refl.size()) throw ValidationError("omega and reflectance differ in length");
        std::vector<spectral::ReflectanceSample> s;
        for (std::size_t k = 0; k < omega.size(); ++k) s.push_back({omega[k], refl[k]});
        spectral::FitOptions opt;
        opt.restarts = restarts;
        opt.seed = rng_seed;
        py::gil_scoped_release nogil;
        const auto r = spectral::fit_fbg(s, seed, opt);
        py::gil_scoped_acquire gil;
        return py::make_tuple(r.model, r.residual, r.seed_residual);
      },
      py::arg("omega"), py::arg("reflectance"), py::arg("seed"), py::arg("restarts") = 3,
      py::arg("rng_seed") = 20240531, "Returns (model, residual, seed_residual).");

  // -- interference
  m.def(
      "identical_source_visibility",
      [](double tc, double tau14, double jitter, const std::string& filter, double factor) {
        py::gil_scoped_release nogil;
        return interference::identical_source_visibility(tc, tau14, jitter, vis_model(filter, factor));
      },
      py::arg("tc"), py::arg("tau14"), py::arg("jitter"), py::arg("filter") = "rect",
      py::arg("bs_window_factor") = 8.0);
  m.def(
      "visibility_map",
      [](const std::vector<double>& tcs, const std::vector<double>& t14s, double jitter, const std::string& filter,
         double factor, int threads) {
        py::gil_scoped_release nogil;
        return interference::visibility_map(tcs, t14s, jitter, vis_model(filter, factor), threads).v;
      },
      py::arg("tc_values"), py::arg("tau14_values"), py::arg("jitter"), py::arg("filter") = "rect",
      py::arg("bs_window_factor") = 8.0, py::arg("threads") = 1, "Row-major flat list, rows follow tc_values.");

  // Scenario documents: the same JSON as the CLI, durations in ps there.
  py::class_<scenario::Scenario>(m, "Scenario")
      .def_static(
          "from_dict",
          [](const py::object& doc, const std::filesystem::path& base_dir) {
            return scenario::parse(from_py(doc), base_dir);
          },
          py::arg("doc"), py::arg("base_dir") = std::filesystem::path("."))
      .def_static("load", &scenario::load, py::arg("path"))
      .def_property_readonly("tau14", [](const scenario::Scenario& s) { return s.tau14; })
      .def_property_readonly("tau23", [](const scenario::Scenario& s) { return s.tau23; })
      .def_property_readonly("delays", [](const scenario::Scenario& s) { return s.delays; })
      .def_property_readonly("jitter", [](const scenario::Scenario& s) { return s.detectors.jitter_fwhm; })
      .def(
          "coherence_time",
          [](const scenario::Scenario& s, const std::string& source, bool with_jitter) {
            if (source != "a" && source != "b") throw ValidationError("source must be 'a' or 'b'");
            const auto g = s.frequency_grid();
            const bool a = source == "a";
            const auto jsa = (a ? s.source_a : s.source_b).jsa(g);
            const auto& j = s.detectors.jitter_fwhm;
            py::gil_scoped_release nogil;
            return with_jitter ? interference::coherence_time(jsa, j[a ? 0 : 2], j[a ? 1 : 3])
                               : interference::coherence_time(jsa);
          },
          py::arg("source") = "a", py::arg("with_jitter") = true)
      .def(
          "fourfold_probability",
          [](const scenario::Scenario& s, double tau, double tau14) {
            const auto setup = s.setup(tau14 > 0.0 ? tau14 : s.tau14.front());
            py::gil_scoped_release nogil;
            return interference::fourfold_probability(setup, tau);
          },
          py::arg("tau"), py::arg("tau14") = 0.0)
      .def(
          "fourfold_probability_oracle",
          [](const scenario::Scenario& s, double tau, double tau14) {
            const auto setup = s.setup(tau14 > 0.0 ? tau14 : s.tau14.front());
            py::gil_scoped_release nogil;
            return interference::fourfold_probability_oracle(setup, tau);
          },
          py::arg("tau"), py::arg("tau14") = 0.0)
      .def(
          "hom_curve",
          [](const scenario::Scenario& s, double tau14, int threads) {
            const auto setup = s.setup(tau14 > 0.0 ? tau14 : s.tau14.front());
            interference::HomCurve c;
            {
              py::gil_scoped_release nogil;
              c = interference::hom_curve(setup, s.delays, threads);
            }
            return hom_dict(c);
          },
          py::arg("tau14") = 0.0, py::arg("threads") = 1)
      .def(
          "visibility",
          [](const scenario::Scenario& s, double tau14) {
            const auto setup = s.setup(tau14 > 0.0 ? tau14 : s.tau14.front());
            py::gil_scoped_release nogil;
            return interference::visibility(interference::hom_curve(setup, {0.0}));
          },
          py::arg("tau14") = 0.0);

  // -- timetags
  m.def(
      "simulate_streams",
      [](double pair_rate_a, double pair_rate_b, double gamma, std::array<double, 4> noise_rates,
         std::array<double, 4> etas, std::array<double, 4> jitter, double duration, std::uint64_t seed,
         double pairing_window) {
        timetags::SimScenario s;
        s.pair_rate_a = pair_rate_a;
        s.pair_rate_b = pair_rate_b;
        s.gamma = gamma;
        s.noise_rates = noise_rates;
        s.etas = etas;
        s.detectors.jitter_fwhm = jitter;
        s.duration = duration;
        s.rng_seed = seed;
        s.pairing_window = pairing_window;
        timetags::TagStream st;
        {
          py::gil_scoped_release nogil;
          st = timetags::simulate_streams(s);
        }
        std::vector<int> ch;
        std::vector<std::int64_t> t;
        ch.reserve(st.events.size());
        t.reserve(st.events.size());
        for (const auto& e : st.events) ch.push_back(e.channel), t.push_back(e.timestamp_fs);
        return py::make_tuple(ch, t);
      },
      py::arg("pair_rate_a"), py::arg("pair_rate_b"), py::arg("gamma") = 0.5,
      py::arg("noise_rates") = std::array<double, 4>{}, py::arg("etas") = std::array<double, 4>{1, 1, 1, 1},
      py::arg("jitter") = std::array<double, 4>{}, py::arg("duration") = 1e-3, py::arg("seed") = 1,
      py::arg("pairing_window") = 20e-12, "Returns (channels, timestamps_fs), channels 1..4.");
  m.def(
      "count_with_accidentals",
      [](const std::vector<int>& ch, const std::vector<std::int64_t>& t, double duration, double tau_14, double tau_23,
         double tau, double delta, int threads) {
        const auto stream = make_stream(ch, t, duration);
        const auto cfg = windows(tau_14, tau_23);
        timetags::FourfoldCounts c;
        {
          py::gil_scoped_release nogil;
          c = timetags::count_with_accidentals(stream, cfg, tau, delta > 0.0 ? delta : 20.0 * tau_23, threads);
        }
        return to_py(io::to_json(c));
      },
      py::arg("channels"), py::arg("timestamps_fs"), py::arg("duration"), py::arg("tau_14"), py::arg("tau_23"),
      py::arg("tau") = 0.0, py::arg("delta") = 0.0, py::arg("threads") = 1);
  m.def(
      "analytic_accidentals",
      [](double mu_c1, double mu_c2, std::array<double, 4> eta, std::array<double, 4> p_noise, double gamma) {
        timetags::AccidentalParams p{mu_c1, mu_c2, eta, p_noise, gamma};
        const auto a = timetags::analytic_accidentals(p);
        py::dict d;
        d["a0"] = a.a0;
        d["as2"] = a.as2;
        d["as3"] = a.as3;
        d["p_real"] = a.p_real;
        return d;
      },
      py::arg("mu_c1"), py::arg("mu_c2"), py::arg("eta"), py::arg("p_noise"), py::arg("gamma"));

  // -- rates
  m.def("cw_fourfold_rate", &rates::cw_fourfold_rate, py::arg("mu"), py::arg("tc"), py::arg("tau_w"),
        py::arg("etas") = py::none(), py::arg("with_bsm_factor") = false);
  m.def("pulsed_rate", &rates::pulsed_rate, py::arg("mu_p"), py::arg("tau_p"), py::arg("tc"), py::arg("f_rep"));
  m.def(
      "optimize_window",
      [](double mu, double jitter, double v_target, double tc_max, double tau_w_min, double tau_w_max, int n_samples,
         const std::string& filter, int threads) {
        rates::RateQuery q;
        q.mu = mu;
        q.jitter = jitter;
        q.v_target = v_target;
        q.tc_max = tc_max;
        q.tau_w_min = tau_w_min;
        q.tau_w_max = tau_w_max;
        q.n_samples = n_samples;
        q.model.filter = kind_of(filter);
        rates::OptResult r;
        {
          py::gil_scoped_release nogil;
          r = rates::optimize_window(q, threads);
        }
        return to_py(io::to_json(r));
      },
      py::arg("mu") = 0.01, py::arg("jitter") = 15e-12, py::arg("v_target") = 0.95, py::arg("tc_max") = 800e-12,
      py::arg("tau_w_min") = 5e-12, py::arg("tau_w_max") = 1e-9, py::arg("n_samples") = 40,
      py::arg("filter") = "rect", py::arg("threads") = 1, "OptResult as a dict (ps and Hz, like the CLI).");
  m.def(
      "pass_swaps",
      [](const std::vector<double>& t, const std::vector<std::array<double, 4>>& loss_db, double mu, double tc,
         double tau_w) {
        rates::LossProfile p{t, loss_db};
        return rates::pass_swaps(p, mu, tc, tau_w);
      },
      py::arg("t"), py::arg("loss_db"), py::arg("mu"), py::arg("tc"), py::arg("tau_w"));
}
