#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cwhom/io.hpp"

namespace cwhom::scenario {

using io::Json;

/// One SPDC source: signal and idler filters. Widths in the file are in pm
/// (or a coherence time in ps for matched analytic filters).
struct SourceSpec {
  enum class Kind { Analytic, Fbg, Tabulated };
  Kind kind = Kind::Analytic;
  spectral::FilterKind filter = spectral::FilterKind::Rect;
  double signal_fwhm = 0.0;  // rad/s
  double idler_fwhm = 0.0;
  std::optional<spectral::FbgModel> signal_fbg, idler_fbg;
  std::optional<spectral::FilterTable> signal_table, idler_table;

  double widest_fwhm() const;
  double narrowest_fwhm() const;
  spectral::SpectralAmplitude signal(const spectral::FrequencyGrid& g) const;
  spectral::SpectralAmplitude idler(const spectral::FrequencyGrid& g) const;
  spectral::JointSpectralAmplitude jsa(const spectral::FrequencyGrid& g) const;
};

struct GridSpec {
  std::optional<long> n_points;
  double span_factor = 8.0;
  long min_points = 513;
  double nodes_per_fwhm = 32.0;
};

/// Parsed scenario file. Every duration in the file is in ps and is held
/// here in seconds. Subcommand sections are kept as JSON and read by the
/// subcommand that needs them.
struct Scenario {
  std::filesystem::path base_dir;
  Json raw;

  SourceSpec source_a, source_b;
  detection::DetectorModel detectors;
  std::vector<double> tau14;  // s, first entry is the reference window
  double tau23 = 2000e-12;
  std::vector<double> delays;  // s
  GridSpec grid;
  std::uint64_t rng_seed = 1;

  /// Shared frequency grid for both sources and every requested window.
  spectral::FrequencyGrid frequency_grid() const;
  interference::InterferenceSetup setup(double tau_14) const;
  interference::InterferenceSetup setup(double tau_14, const spectral::FrequencyGrid& g) const;

  /// Section of `raw`, or an empty object.
  Json section(const std::string& name) const;
  std::filesystem::path resolve(const std::string& relative) const;
};

/// Parses and validates a scenario document; unknown keys anywhere are
/// ValidationErrors. File references resolve against `base_dir`.
Scenario parse(const Json& doc, const std::filesystem::path& base_dir);
Scenario load(const std::filesystem::path& path);

/// Rejects keys of `obj` that are not in `allowed`.
void check_keys(const Json& obj, const std::vector<std::string>& allowed, const std::string& context);

double get_number(const Json& obj, const std::string& key, const std::string& context);
double get_number(const Json& obj, const std::string& key, double fallback, const std::string& context);

}  // namespace cwhom::scenario
