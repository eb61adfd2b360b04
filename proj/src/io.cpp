#include "cwhom/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "cwhom/errors.hpp"

namespace cwhom::io {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string s) {
  const auto ws = [](unsigned char c) { return std::isspace(c) != 0; };
  s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), ws));
  s.erase(std::find_if_not(s.rbegin(), s.rend(), ws).base(), s.end());
  return s;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  for (std::string cell; std::getline(ss, cell, ',');) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

void expect_header(const CsvTable& t, const std::vector<std::string>& required, std::size_t optional,
                   const fs::path& path) {
  const std::size_t n = t.header.size();
  bool ok = n >= required.size() && n <= required.size() + optional;
  for (std::size_t k = 0; ok && k < required.size(); ++k) ok = t.header[k] == required[k];
  if (!ok) {
    std::string want;
    for (const auto& h : required) want += (want.empty() ? "" : ",") + h;
    throw ValidationError(path.string() + ": expected header starting '" + want + "'");
  }
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    if (t.rows[r].size() != n)
      throw ValidationError(path.string() + ": row " + std::to_string(r + 2) + " has " +
                            std::to_string(t.rows[r].size()) + " cells, header has " + std::to_string(n));
}

}  // namespace

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read " + path.string());
  CsvTable t;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    if (!have_header) {
      t.header = split(line);
      have_header = true;
    } else {
      t.rows.push_back(split(line));
    }
  }
  if (!have_header) throw ValidationError(path.string() + ": missing CSV header");
  return t;
}

double parse_double(const std::string& cell, const std::string& context) {
  if (cell == "inf" || cell == "Infinity" || cell == "+inf") return std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto* end = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(cell.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ValidationError(context + ": not a number '" + cell + "'");
  return v;
}

spectral::FilterTable read_filter_table(const fs::path& path, double center) {
  const CsvTable t = read_csv(path);
  expect_header(t, {"wavelength_pm", "reflectance"}, 1, path);
  const bool phase = t.header.size() == 3;
  if (phase && t.header[2] != "phase_rad") throw ValidationError(path.string() + ": third column must be phase_rad");
  spectral::FilterTable out;
  for (auto it = t.rows.rbegin(); it != t.rows.rend(); ++it) {
    const double pm = parse_double((*it)[0], path.string());
    out.omega.push_back(-wavelength_to_angular(pm * kPico, center));
    out.power.push_back(parse_double((*it)[1], path.string()));
    if (phase) out.phase.push_back(parse_double((*it)[2], path.string()));
  }
  return out;
}

std::vector<spectral::ReflectanceSample> read_reflectance(const fs::path& path, double center) {
  const auto table = read_filter_table(path, center);
  std::vector<spectral::ReflectanceSample> out;
  for (std::size_t k = 0; k < table.omega.size(); ++k) out.push_back({table.omega[k], table.power[k]});
  return out;
}

void write_reflectance(const fs::path& path, const std::vector<spectral::ReflectanceSample>& s, double center) {
  std::string text = "wavelength_pm,reflectance\n";
  for (auto it = s.rbegin(); it != s.rend(); ++it)
    text += format_double(-angular_to_wavelength(it->omega, center) / kPico) + "," +
            format_double(it->reflectance) + "\n";
  write_text(path, text);
}

timetags::TagStream read_tags(const fs::path& path) {
  const CsvTable t = read_csv(path);
  expect_header(t, {"channel", "timestamp_fs"}, 0, path);
  timetags::TagStream s;
  s.events.reserve(t.rows.size());
  for (const auto& row : t.rows) {
    int ch = 0;
    std::int64_t ts = 0;
    const auto r1 = std::from_chars(row[0].data(), row[0].data() + row[0].size(), ch);
    const auto r2 = std::from_chars(row[1].data(), row[1].data() + row[1].size(), ts);
    if (r1.ec != std::errc() || r2.ec != std::errc() || r1.ptr != row[0].data() + row[0].size() ||
        r2.ptr != row[1].data() + row[1].size())
      throw ValidationError(path.string() + ": bad tag row '" + row[0] + "," + row[1] + "'");
    if (ch < 1 || ch > 4 || ts < 0)
      throw ValidationError(path.string() + ": channel must be 1..4 and timestamps >= 0, got '" + row[0] + "," +
                            row[1] + "'");
    s.events.push_back({ch, ts});
  }
  // The file carries no duration; the last tag bounds it.
  s.duration = s.events.empty() ? 0.0 : static_cast<double>(s.events.back().timestamp_fs) * kFemto;
  for (std::size_t k = 1; k < s.events.size(); ++k)
    if (s.events[k].timestamp_fs < s.events[k - 1].timestamp_fs)
      throw ValidationError(path.string() + ": tags are not sorted at row " + std::to_string(k + 2));
  return s;
}

void write_tags(const fs::path& path, const timetags::TagStream& stream) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << "channel,timestamp_fs\n";
  for (const auto& e : stream.events) out << e.channel << ',' << e.timestamp_fs << '\n';
}

rates::LossProfile read_loss_profile(const fs::path& path) {
  const CsvTable t = read_csv(path);
  expect_header(t, {"t_s", "loss1_db", "loss2_db", "loss3_db", "loss4_db"}, 0, path);
  rates::LossProfile p;
  for (const auto& row : t.rows) {
    p.t.push_back(parse_double(row[0], path.string()));
    std::array<double, 4> l{};
    for (std::size_t c = 0; c < 4; ++c) l[c] = parse_double(row[c + 1], path.string());
    p.loss.push_back(l);
  }
  return p;
}

Json to_json(const spectral::FbgModel& m) {
  Json j;
  j["length_m"] = m.length;
  j["n_sections"] = m.n_sections;
  j["peak_kappa_per_m"] = m.peak_kappa;
  if (std::isinf(m.order)) j["order"] = "inf";
  else j["order"] = m.order;
  j["width_fraction"] = m.width_fraction;
  j["detuning_offset_rad_per_s"] = m.detuning_offset;
  j["design_wavelength_m"] = m.design_wavelength;
  j["effective_index"] = m.effective_index;
  return j;
}

spectral::FbgModel fbg_model_from_json(const Json& j) {
  static const std::vector<std::string> keys{"length_m",       "n_sections",
                                             "peak_kappa_per_m", "order",
                                             "width_fraction", "detuning_offset_rad_per_s",
                                             "design_wavelength_m", "effective_index"};
  if (!j.is_object()) throw ValidationError("fbg model must be a JSON object");
  for (const auto& [k, v] : j.items())
    if (std::find(keys.begin(), keys.end(), k) == keys.end())
      throw ValidationError("fbg model: unknown key '" + k + "'");
  spectral::FbgModel m;
  try {
    m.length = j.at("length_m").get<double>();
    m.peak_kappa = j.at("peak_kappa_per_m").get<double>();
    m.n_sections = j.value("n_sections", m.n_sections);
    if (j.contains("order")) {
      const auto& o = j["order"];
      m.order = o.is_string() && o.get<std::string>() == "inf" ? std::numeric_limits<double>::infinity()
                                                                 : o.get<double>();
    }
    m.width_fraction = j.value("width_fraction", m.width_fraction);
    m.detuning_offset = j.value("detuning_offset_rad_per_s", m.detuning_offset);
    m.design_wavelength = j.value("design_wavelength_m", m.design_wavelength);
    m.effective_index = j.value("effective_index", m.effective_index);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("fbg model: ") + e.what());
  }
  m.validate();
  return m;
}

Json to_json(const rates::OptResult& r) {
  Json j;
  j["tau_w_opt_ps"] = to_ps(r.tau_w_opt);
  j["tc_opt_ps"] = to_ps(r.tc_opt);
  j["rate_opt_hz"] = r.rate_opt;
  Json curve = Json::array();
  for (const auto& s : r.curve) {
    Json c;
    c["tau_w_ps"] = to_ps(s.tau_w);
    c["feasible"] = s.feasible;
    c["tc_ps"] = s.feasible ? Json(to_ps(s.tc)) : Json(nullptr);
    c["rate_hz"] = s.rate;
    c["visibility"] = s.feasible ? Json(s.visibility) : Json(nullptr);
    curve.push_back(c);
  }
  j["curve"] = curve;
  return j;
}

Json to_json(const timetags::FourfoldCounts& c) {
  return Json{{"raw", c.raw}, {"shifted_2", c.shifted_2}, {"shifted_3", c.shifted_3}, {"corrected", c.corrected}};
}

double to_ps(double seconds) {
  // 12 significant digits hide the round trip through seconds (250 not 250.00000000000003).
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", seconds / kPico);
  return std::strtod(buf, nullptr);
}

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << text;
}

}  // namespace cwhom::io
