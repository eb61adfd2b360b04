#pragma once

#include <array>
#include <vector>

namespace cwhom::detection {

/// Channel order used everywhere: 1, 2', 3', 4. Source A feeds 1 and 2',
/// source B feeds 3' and 4; 1 is the trigger.
enum Channel : int { kCh1 = 0, kCh2 = 1, kCh3 = 2, kCh4 = 3 };

/// Per-channel Gaussian timing jitter, FWHM in seconds. Zero is an ideal
/// detector.
struct DetectorModel {
  std::array<double, 4> jitter_fwhm{17e-12, 13e-12, 11e-12, 16e-12};

  void validate() const;
  double max_jitter() const;
  double sigma(int channel) const;
};

enum class JitterKind { Fwhm, Rms };

struct JitterComponent {
  double value;  // s
  JitterKind kind = JitterKind::Fwhm;
};

/// Total FWHM of independent Gaussian contributions (quadrature sum).
double effective_jitter(const std::vector<JitterComponent>& components);

/// Fourier transform of the jitter density, normalized to 1 at zero
/// frequency difference: exp(-sigma^2 dOmega^2 / 2).
double jitter_kernel(double jitter_fwhm, double delta_omega);

/// Probability that a photon arriving at `t` is tagged inside [lo, hi]
/// (Gaussian density convolved with the window indicator).
double window_acceptance(double jitter_fwhm, double t, double lo, double hi);

}  // namespace cwhom::detection
