#include "cwhom/detection.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cwhom/errors.hpp"
#include "cwhom/units.hpp"

namespace cwhom::detection {

void DetectorModel::validate() const {
  for (double j : jitter_fwhm)
    if (!std::isfinite(j) || j < 0.0) throw ValidationError("jitter must be finite and >= 0");
}

double DetectorModel::max_jitter() const {
  return *std::max_element(jitter_fwhm.begin(), jitter_fwhm.end());
}

double DetectorModel::sigma(int channel) const {
  return fwhm_to_sigma(jitter_fwhm.at(static_cast<std::size_t>(channel)));
}

double effective_jitter(const std::vector<JitterComponent>& components) {
  if (components.empty()) throw ValidationError("effective_jitter needs at least one component");
  double sum = 0.0;
  for (const auto& c : components) {
    if (!std::isfinite(c.value) || c.value < 0.0)
      throw ValidationError("jitter component must be finite and >= 0");
    const double f = c.kind == JitterKind::Rms ? sigma_to_fwhm(c.value) : c.value;
    sum += f * f;
  }
  return std::sqrt(sum);
}

double jitter_kernel(double jitter_fwhm, double delta_omega) {
  if (!(jitter_fwhm >= 0.0)) throw ValidationError("jitter must be >= 0");
  const double s = fwhm_to_sigma(jitter_fwhm) * delta_omega;
  return std::exp(-0.5 * s * s);
}

double window_acceptance(double jitter_fwhm, double t, double lo, double hi) {
  if (jitter_fwhm == 0.0) return (t >= lo && t <= hi) ? 1.0 : 0.0;
  const double k = 1.0 / (std::sqrt(2.0) * fwhm_to_sigma(jitter_fwhm));
  return 0.5 * (std::erf((hi - t) * k) - std::erf((lo - t) * k));
}

}  // namespace cwhom::detection
