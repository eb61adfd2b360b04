#pragma once

#include <cmath>
#include <numbers>

namespace cwhom {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Wavelength used to convert filter bandwidths quoted in pm.
inline constexpr double kReferenceWavelength = 1550e-9;  // m

inline constexpr double kPico = 1e-12;
inline constexpr double kFemto = 1e-15;

/// FWHM of a Gaussian divided by its standard deviation, 2*sqrt(2 ln 2).
inline const double kFwhmPerSigma = 2.0 * std::sqrt(2.0 * std::numbers::ln2);

inline double fwhm_to_sigma(double fwhm) { return fwhm / kFwhmPerSigma; }
inline double sigma_to_fwhm(double sigma) { return sigma * kFwhmPerSigma; }

/// Angular-frequency width [rad/s] of a wavelength width [m] at `center` [m].
inline double wavelength_to_angular(double d_lambda, double center = kReferenceWavelength) {
  return kTwoPi * kSpeedOfLight * d_lambda / (center * center);
}

inline double angular_to_wavelength(double d_omega, double center = kReferenceWavelength) {
  return d_omega * center * center / (kTwoPi * kSpeedOfLight);
}

inline double pm_to_angular(double pm) { return wavelength_to_angular(pm * kPico); }
inline double angular_to_pm(double d_omega) { return angular_to_wavelength(d_omega) / kPico; }

/// sinc(x) = sin(x)/x with sinc(0) = 1.
inline double sinc(double x) {
  if (std::abs(x) < 1e-8) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

}  // namespace cwhom
