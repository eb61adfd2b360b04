#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "cwhom/units.hpp"

namespace cwhom::spectral {

using Complex = std::complex<double>;

/// Uniform, symmetric angular-frequency grid Omega_m in [-span, +span].
/// The odd node count puts Omega = 0 on a node and makes the grid closed
/// under negation, so F(-Omega) is read off exactly.
class FrequencyGrid {
 public:
  FrequencyGrid(long n_points, double span);

  long size() const noexcept { return n_points_; }
  double span() const noexcept { return span_; }
  double step() const noexcept { return 2.0 * span_ / static_cast<double>(n_points_ - 1); }
  double node(long m) const noexcept { return -span_ + static_cast<double>(m) * step(); }
  /// Index of -Omega_m.
  long mirror(long m) const noexcept { return n_points_ - 1 - m; }
  std::vector<double> nodes() const;

  friend bool operator==(const FrequencyGrid&, const FrequencyGrid&) = default;

 private:
  long n_points_;
  double span_;
};

/// Largest node spacing that resolves the sinc and phase kernels for time
/// scales up to `t_max`: dOmega <= 2 pi / (8 t_max).
double max_step_for(double t_max);

/// Throws ResolutionError (with the required node count) when `grid` is too
/// coarse for `t_max`.
void check_resolution(const FrequencyGrid& grid, double t_max);

struct GridRequest {
  double widest_fwhm = 0.0;     // rad/s
  double narrowest_fwhm = 0.0;  // rad/s, 0 = same as widest
  double t_max = 0.0;           // s, longest time scale to resolve
  double span_factor = 8.0;
  long min_points = 513;
  double nodes_per_fwhm = 32.0;
};

/// Default grid: `min_points` nodes over +-span_factor*widest_fwhm, refined
/// (keeping the span) until the resolution rule and the nodes-per-FWHM floor
/// both hold.
FrequencyGrid plan_grid(const GridRequest& request);

/// Complex filter response sampled on a grid; |amp| <= 1.
struct SpectralAmplitude {
  FrequencyGrid grid;
  std::vector<Complex> amp;

  SpectralAmplitude(FrequencyGrid g, std::vector<Complex> values);

  Complex at(long m) const { return amp[static_cast<std::size_t>(m)]; }
};

/// J(Omega) = F_s(Omega) F_i(-Omega) Phi(Omega) on a grid.
struct JointSpectralAmplitude {
  FrequencyGrid grid;
  std::vector<Complex> values;

  /// Nodes where J is exactly zero contribute nothing to any spectral sum.
  std::vector<long> support() const;
  double max_modulus() const;
};

enum class FilterKind { Rect, Gaussian, Lorentzian, Tabulated };

FilterKind parse_filter_kind(std::string_view name);
std::string_view to_string(FilterKind kind);

/// User table of |F|^2 and phase against angular-frequency offset.
struct FilterTable {
  std::vector<double> omega;  // rad/s, strictly increasing
  std::vector<double> power;  // |F|^2 in [0,1]
  std::vector<double> phase;  // rad, empty = zero phase
};

/// Analytic filters with zero phase. `fwhm` is the full width at half
/// maximum of |F|^2 in rad/s. The rectangle is cell-averaged so that the
/// discrete filter integrates to exactly `fwhm`.
SpectralAmplitude make_filter(FilterKind kind, double fwhm, const FrequencyGrid& grid);

/// Linear interpolation of a table; zero outside the tabulated range.
SpectralAmplitude make_filter(const FilterTable& table, const FrequencyGrid& grid);

/// Full width at half maximum of |F|^2, by linear interpolation outward
/// from the peak.
double power_fwhm(const SpectralAmplitude& filter);

/// Filter whose jitter-free coherence function has FWHM `coherence_time`
/// when used on both arms of a pair (rect and gaussian kinds only).
double filter_fwhm_for_coherence_time(FilterKind kind, double coherence_time);

/// Zero of sinc^2(x) - 1/2; the rect-JSA coherence FWHM is 4*x/W.
inline constexpr double kSincSquaredHalfPoint = 1.3915573782515103;

// ---------------------------------------------------------------------------
// Fiber Bragg gratings

/// Piecewise-uniform coupled-mode model of a reflective FBG with
/// super-Gaussian apodization kappa(x) = peak_kappa * exp(-|x/w|^(2p)),
/// x in [-1, 1] along the grating. order = +inf gives a uniform grating of
/// half-width w.
struct FbgModel {
  double length = 0.05;              // m
  int n_sections = 200;
  double peak_kappa = 100.0;         // 1/m
  double order = 2.0;                // p >= 1
  double width_fraction = 0.8;       // w in (0, 1]
  double detuning_offset = 0.0;      // rad/s, line center relative to the grid
  double design_wavelength = kReferenceWavelength;  // m
  double effective_index = 1.447;

  /// Throws ValidationError on out-of-range fields.
  void validate() const;
  double kappa_at(double x) const;
};

struct FbgSpectrum {
  SpectralAmplitude reflection;
  SpectralAmplitude transmission;
};

FbgSpectrum fbg_spectrum(const FbgModel& model, const FrequencyGrid& grid);
/// Reflection used as a photon filter: as fbg_spectrum().reflection but with
/// the mean group delay over the band removed (linear phase only).
SpectralAmplitude fbg_response(const FbgModel& model, const FrequencyGrid& grid);

/// |r|^2 at arbitrary angular-frequency offsets.
std::vector<double> fbg_reflectance(const FbgModel& model, std::span<const double> omegas);

/// Apodization shape shared by a family of gratings; the length is solved
/// for a target bandwidth.
struct FbgShape {
  double kappa_length = 5.0;  // peak kappa * L
  double order = 2.0;
  double width_fraction = 0.8;
  int n_sections = 200;
  double effective_index = 1.447;
};

/// Grating of the given shape whose |r|^2 FWHM equals `fwhm` [rad/s].
/// The response depends on (delta L, kappa L) only, so the length follows
/// from a single unit-length evaluation.
FbgModel design_fbg(double fwhm, const FbgShape& shape,
                    double design_wavelength = kReferenceWavelength);

/// FWHM of |r|^2 in rad/s, located by root bracketing of the half-maximum.
double fbg_fwhm(const FbgModel& model);

struct ReflectanceSample {
  double omega;        // rad/s
  double reflectance;  // [0, 1]
};

struct FitOptions {
  int restarts = 3;
  std::uint64_t seed = 20240531;
  int max_iterations = 4000;
  double tolerance = 1e-12;  // simplex spread in objective value
};

struct FbgFitResult {
  FbgModel model;
  double residual = 0.0;       // sum of squared reflectance residuals
  double seed_residual = 0.0;
  int iterations = 0;          // of the winning run
};

double fbg_residual(const FbgModel& model, std::span<const ReflectanceSample> measured);

/// Nelder-Mead fit of (length, peak_kappa, order, width_fraction,
/// detuning_offset) to a measured reflectance table, from the seed plus
/// `restarts` randomly perturbed starts. Never returns a model worse than
/// the seed.
FbgFitResult fit_fbg(std::span<const ReflectanceSample> measured, const FbgModel& seed,
                     const FitOptions& options = {});

// ---------------------------------------------------------------------------

/// J(Omega) = F_s(Omega) F_i(-Omega) Phi(Omega), rescaled to max |J| = 1
/// unless `normalize` is false. Phi defaults to 1.
JointSpectralAmplitude joint_spectral_amplitude(
    const SpectralAmplitude& signal, const SpectralAmplitude& idler,
    const std::optional<SpectralAmplitude>& pump_envelope = std::nullopt, bool normalize = true);

}  // namespace cwhom::spectral
