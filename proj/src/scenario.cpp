#include "cwhom/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "cwhom/errors.hpp"

namespace cwhom::scenario {

namespace fs = std::filesystem;
using spectral::FilterKind;

void check_keys(const Json& obj, const std::vector<std::string>& allowed, const std::string& context) {
  if (!obj.is_object()) throw ValidationError(context + " must be an object");
  for (const auto& [k, v] : obj.items())
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
      throw ValidationError(context + ": unknown key '" + k + "'");
}

double get_number(const Json& obj, const std::string& key, const std::string& context) {
  if (!obj.contains(key)) throw ValidationError(context + ": missing '" + key + "'");
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ValidationError(context + "." + key + " must be a number");
  return v.get<double>();
}

double get_number(const Json& obj, const std::string& key, double fallback, const std::string& context) {
  return obj.contains(key) ? get_number(obj, key, context) : fallback;
}

namespace {

constexpr double ps = kPico;

std::vector<double> number_list(const Json& v, const std::string& context) {
  std::vector<double> out;
  if (v.is_number()) {
    out.push_back(v.get<double>());
  } else if (v.is_array() && !v.empty()) {
    for (const auto& x : v) {
      if (!x.is_number()) throw ValidationError(context + " must hold numbers");
      out.push_back(x.get<double>());
    }
  } else {
    throw ValidationError(context + " must be a number or a nonempty array of numbers");
  }
  return out;
}

spectral::FbgModel parse_fbg(const Json& j, const fs::path& base, const std::string& ctx) {
  check_keys(j, {"fwhm_pm", "kappa_length", "order", "width_fraction", "n_sections", "model", "measured_csv"}, ctx);
  if (j.contains("model")) {
    if (j.size() != 1) throw ValidationError(ctx + ": 'model' excludes the design keys");
    return io::fbg_model_from_json(j["model"]);
  }
  spectral::FbgShape shape;
  shape.kappa_length = get_number(j, "kappa_length", shape.kappa_length, ctx);
  if (j.contains("order")) {
    const auto& o = j["order"];
    shape.order = o.is_string() && o.get<std::string>() == "inf" ? std::numeric_limits<double>::infinity()
                                                                   : get_number(j, "order", ctx);
  }
  shape.width_fraction = get_number(j, "width_fraction", shape.width_fraction, ctx);
  if (j.contains("n_sections")) shape.n_sections = j["n_sections"].get<int>();
  const double fwhm = pm_to_angular(get_number(j, "fwhm_pm", ctx));
  const spectral::FbgModel designed = spectral::design_fbg(fwhm, shape);
  if (!j.contains("measured_csv")) return designed;
  // Measured lobe: the design is only the seed of the fit.
  const auto measured = io::read_reflectance(base / j["measured_csv"].get<std::string>());
  return spectral::fit_fbg(measured, designed).model;
}

SourceSpec parse_source(const Json& j, const fs::path& base, const std::string& ctx) {
  if (!j.is_object() || !j.contains("filter")) throw ValidationError(ctx + ": missing 'filter'");
  const std::string kind = j["filter"].get<std::string>();
  SourceSpec s;
  if (kind == "fbg") {
    check_keys(j, {"filter", "signal", "idler"}, ctx);
    s.kind = SourceSpec::Kind::Fbg;
    s.signal_fbg = parse_fbg(j.at("signal"), base, ctx + ".signal");
    s.idler_fbg = parse_fbg(j.at("idler"), base, ctx + ".idler");
    s.signal_fwhm = spectral::fbg_fwhm(*s.signal_fbg);
    s.idler_fwhm = spectral::fbg_fwhm(*s.idler_fbg);
    return s;
  }
  s.filter = spectral::parse_filter_kind(kind);
  if (s.filter == FilterKind::Tabulated) {
    check_keys(j, {"filter", "signal_csv", "idler_csv"}, ctx);
    s.kind = SourceSpec::Kind::Tabulated;
    s.signal_table = io::read_filter_table(base / j.at("signal_csv").get<std::string>());
    s.idler_table = io::read_filter_table(base / j.at("idler_csv").get<std::string>());
    auto width = [](const spectral::FilterTable& t) {
      double lo = t.omega.back(), hi = t.omega.front();
      const double peak = *std::max_element(t.power.begin(), t.power.end());
      for (std::size_t k = 0; k < t.omega.size(); ++k)
        if (t.power[k] >= 0.5 * peak) lo = std::min(lo, t.omega[k]), hi = std::max(hi, t.omega[k]);
      return std::max(hi - lo, t.omega[1] - t.omega[0]);
    };
    s.signal_fwhm = width(*s.signal_table);
    s.idler_fwhm = width(*s.idler_table);
    return s;
  }
  check_keys(j, {"filter", "coherence_time_ps", "signal_fwhm_pm", "idler_fwhm_pm"}, ctx);
  if (j.contains("coherence_time_ps")) {
    if (j.contains("signal_fwhm_pm") || j.contains("idler_fwhm_pm"))
      throw ValidationError(ctx + ": give either coherence_time_ps or filter widths");
    s.signal_fwhm = s.idler_fwhm =
        spectral::filter_fwhm_for_coherence_time(s.filter, get_number(j, "coherence_time_ps", ctx) * ps);
  } else {
    s.signal_fwhm = pm_to_angular(get_number(j, "signal_fwhm_pm", ctx));
    s.idler_fwhm = pm_to_angular(get_number(j, "idler_fwhm_pm", ctx));
  }
  if (!(s.signal_fwhm > 0.0 && s.idler_fwhm > 0.0)) throw ValidationError(ctx + ": widths must be positive");
  return s;
}

}  // namespace

double SourceSpec::widest_fwhm() const { return std::max(signal_fwhm, idler_fwhm); }
double SourceSpec::narrowest_fwhm() const { return std::min(signal_fwhm, idler_fwhm); }

spectral::SpectralAmplitude SourceSpec::signal(const spectral::FrequencyGrid& g) const {
  switch (kind) {
    case Kind::Fbg: return spectral::fbg_response(*signal_fbg, g);
    case Kind::Tabulated: return spectral::make_filter(*signal_table, g);
    default: return spectral::make_filter(filter, signal_fwhm, g);
  }
}

spectral::SpectralAmplitude SourceSpec::idler(const spectral::FrequencyGrid& g) const {
  switch (kind) {
    case Kind::Fbg: return spectral::fbg_response(*idler_fbg, g);
    case Kind::Tabulated: return spectral::make_filter(*idler_table, g);
    default: return spectral::make_filter(filter, idler_fwhm, g);
  }
}

spectral::JointSpectralAmplitude SourceSpec::jsa(const spectral::FrequencyGrid& g) const {
  return spectral::joint_spectral_amplitude(signal(g), idler(g));
}

spectral::FrequencyGrid Scenario::frequency_grid() const {
  const double widest = std::max(source_a.widest_fwhm(), source_b.widest_fwhm());
  const double narrowest = std::min(source_a.narrowest_fwhm(), source_b.narrowest_fwhm());
  if (grid.n_points) return spectral::FrequencyGrid(*grid.n_points, grid.span_factor * widest);
  double t_max = std::max(*std::max_element(tau14.begin(), tau14.end()), tau23);
  for (double d : delays) t_max = std::max(t_max, std::abs(d));
  // Coherence times are not known before the grid exists; 8/W bounds them
  // for every filter family used here.
  t_max = std::max(t_max, 8.0 / narrowest);
  spectral::GridRequest r;
  r.widest_fwhm = widest;
  r.narrowest_fwhm = narrowest;
  r.t_max = t_max;
  r.span_factor = grid.span_factor;
  r.min_points = grid.min_points;
  r.nodes_per_fwhm = grid.nodes_per_fwhm;
  return spectral::plan_grid(r);
}

interference::InterferenceSetup Scenario::setup(double tau_14) const { return setup(tau_14, frequency_grid()); }

interference::InterferenceSetup Scenario::setup(double tau_14, const spectral::FrequencyGrid& g) const {
  interference::InterferenceSetup s{source_a.jsa(g), source_b.jsa(g), detectors, {}};
  s.windows.tau_14 = tau_14;
  s.windows.tau_23 = tau23;
  s.validate();
  return s;
}

Json Scenario::section(const std::string& name) const {
  return raw.contains(name) ? raw.at(name) : Json::object();
}

fs::path Scenario::resolve(const std::string& relative) const { return base_dir / relative; }

Scenario parse(const Json& doc, const fs::path& base_dir) {
  check_keys(doc,
             {"$schema", "description", "sources", "detectors", "windows", "delays", "grid", "rng_seed",
              "coherence", "homdip", "vismap", "rate", "pulsed", "pass", "tags", "fbg_fit", "oracle"},
             "scenario");
  Scenario s;
  s.base_dir = base_dir;
  s.raw = doc;
  try {
    const Json sources = doc.value("sources", Json::object());
    check_keys(sources, {"a", "b"}, "sources");
    const Json def = {{"filter", "rect"}, {"coherence_time_ps", 165.0}};
    s.source_a = parse_source(sources.value("a", def), base_dir, "sources.a");
    s.source_b = parse_source(sources.value("b", sources.value("a", def)), base_dir, "sources.b");

    const Json det = doc.value("detectors", Json::object());
    check_keys(det, {"jitter_ps", "tagger_rms_ps"}, "detectors");
    if (det.contains("jitter_ps")) {
      const auto j = number_list(det["jitter_ps"], "detectors.jitter_ps");
      if (j.size() != 4) throw ValidationError("detectors.jitter_ps needs 4 values (channels 1, 2', 3', 4)");
      for (std::size_t c = 0; c < 4; ++c) s.detectors.jitter_fwhm[c] = j[c] * ps;
    }
    if (det.contains("tagger_rms_ps")) {
      const double tagger = get_number(det, "tagger_rms_ps", "detectors") * ps;
      for (auto& j : s.detectors.jitter_fwhm)
        j = detection::effective_jitter({{j, detection::JitterKind::Fwhm}, {tagger, detection::JitterKind::Rms}});
    }
    s.detectors.validate();

    const Json win = doc.value("windows", Json::object());
    check_keys(win, {"tau14_ps", "tau23_ps"}, "windows");
    for (double t : number_list(win.value("tau14_ps", Json(40.0)), "windows.tau14_ps")) s.tau14.push_back(t * ps);
    s.tau23 = get_number(win, "tau23_ps", 2000.0, "windows") * ps;
    for (double t : s.tau14)
      if (!(t > 0.0)) throw ValidationError("windows.tau14_ps must be positive");
    if (!(s.tau23 > 0.0)) throw ValidationError("windows.tau23_ps must be positive");

    const Json del = doc.value("delays", Json::object());
    check_keys(del, {"start_ps", "stop_ps", "count", "values_ps"}, "delays");
    if (del.contains("values_ps")) {
      if (del.size() != 1) throw ValidationError("delays: values_ps excludes start/stop/count");
      for (double t : number_list(del["values_ps"], "delays.values_ps")) s.delays.push_back(t * ps);
    } else {
      const double a = get_number(del, "start_ps", -600.0, "delays");
      const double b = get_number(del, "stop_ps", 600.0, "delays");
      const long n = del.value("count", 121L);
      if (n < 2 || !(b > a)) throw ValidationError("delays need stop > start and count >= 2");
      for (long k = 0; k < n; ++k) s.delays.push_back((a + (b - a) * static_cast<double>(k) / (n - 1)) * ps);
    }

    const Json g = doc.value("grid", Json::object());
    check_keys(g, {"n_points", "span_factor", "min_points", "nodes_per_fwhm"}, "grid");
    if (g.contains("n_points")) s.grid.n_points = g["n_points"].get<long>();
    s.grid.span_factor = get_number(g, "span_factor", s.grid.span_factor, "grid");
    s.grid.min_points = g.value("min_points", s.grid.min_points);
    s.grid.nodes_per_fwhm = get_number(g, "nodes_per_fwhm", s.grid.nodes_per_fwhm, "grid");

    if (doc.contains("rng_seed")) s.rng_seed = doc["rng_seed"].get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("scenario: ") + e.what());
  }
  return s;
}

Scenario load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read scenario " + path.string());
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("scenario " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse(doc, path.has_parent_path() ? path.parent_path() : fs::path("."));
}

}  // namespace cwhom::scenario
