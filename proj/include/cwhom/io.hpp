#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "cwhom/interference.hpp"
#include "cwhom/rates.hpp"
#include "cwhom/spectral.hpp"
#include "cwhom/timetags.hpp"

namespace cwhom::io {

using Json = nlohmann::json;

/// Rows of a CSV file with a required header. Blank lines are skipped.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const std::filesystem::path& path);
double parse_double(const std::string& cell, const std::string& context);

/// `wavelength_pm,reflectance[,phase_rad]` with offsets from line centre.
/// Longer wavelength is lower frequency, so rows are mirrored onto
/// increasing angular frequency.
spectral::FilterTable read_filter_table(const std::filesystem::path& path,
                                        double center = kReferenceWavelength);
std::vector<spectral::ReflectanceSample> read_reflectance(const std::filesystem::path& path,
                                                          double center = kReferenceWavelength);
void write_reflectance(const std::filesystem::path& path, const std::vector<spectral::ReflectanceSample>& s,
                       double center = kReferenceWavelength);

/// `channel,timestamp_fs`, channels 1..4.
timetags::TagStream read_tags(const std::filesystem::path& path);
void write_tags(const std::filesystem::path& path, const timetags::TagStream& stream);

/// `t_s,loss1_db,loss2_db,loss3_db,loss4_db`; "inf" is accepted.
rates::LossProfile read_loss_profile(const std::filesystem::path& path);

Json to_json(const spectral::FbgModel& m);
spectral::FbgModel fbg_model_from_json(const Json& j);

Json to_json(const rates::OptResult& r);
Json to_json(const timetags::FourfoldCounts& c);

/// Seconds to ps for output, trimmed to 12 significant digits.
double to_ps(double seconds);

/// Shortest round-trip decimal form, so equal doubles print identically.
std::string format_double(double x);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace cwhom::io
