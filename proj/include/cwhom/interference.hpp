#pragma once

#include <memory>
#include <vector>

#include "cwhom/detection.hpp"
#include "cwhom/spectral.hpp"

namespace cwhom::interference {

using spectral::JointSpectralAmplitude;

/// Trigger-relative coincidence windows. Channel 1 is the trigger; 2' and 3'
/// must fall in [-tau_23/2, tau_23/2] and 4 in [tau - tau_14/2, tau + tau_14/2].
struct CoincidenceConfig {
  double tau_14 = 40e-12;
  double tau_23 = 2000e-12;
  int trigger_channel = 1;

  void validate() const;
};

/// Source A feeds channels 1 and 2', source B feeds 3' and 4.
/// `tc_a`/`tc_b` are jitter-free coherence times; 0 means "estimate from
/// the JSA when needed".
struct InterferenceSetup {
  JointSpectralAmplitude jsa_a;
  JointSpectralAmplitude jsa_b;
  detection::DetectorModel detectors;
  CoincidenceConfig windows;
  double tc_a = 0.0;
  double tc_b = 0.0;

  void validate() const;
};

struct CoherenceCurve {
  std::vector<double> delays;   // s
  std::vector<double> density;  // unnormalized G(tau)
  double t_c_fwhm = 0.0;        // s
};

/// G(tau) = sum_mn J_m J_n* e^{i(W_m - W_n) tau} g_s(W_n - W_m) g_i(W_n - W_m) dW^2
/// with its FWHM. Throws ValidationError when the delays do not reach the
/// half maximum on both sides of the peak.
CoherenceCurve coherence_function(const JointSpectralAmplitude& jsa, double jit_s, double jit_i,
                                  const std::vector<double>& delays);

/// `n` delays evenly covering [-half_span, +half_span] (n forced odd).
std::vector<double> symmetric_delays(double half_span, long n);

/// FWHM of G(tau) with delays chosen automatically (grown until both
/// half-maximum crossings are bracketed).
double coherence_time(const JointSpectralAmplitude& jsa, double jit_s = 0.0, double jit_i = 0.0);

/// max(tau_14, tau_23, |tau|, T_c,A, T_c,B): the slowest time scale the
/// frequency grid must resolve.
double resolution_time_scale(const InterferenceSetup& setup, double tau);

/// Precomputed contraction of the four-photon sum for one setup. After an
/// O(n^3) setup, every delay costs O(n^2):
///   P(tau) = dW^4 * b~^T M conj(b~),  b~_m = J_B(W_m) e^{-i W_m tau}.
/// The two cross terms of the bracket are one matrix product C and its
/// adjoint; nothing is summed over four nested indices.
class FourfoldEngine {
 public:
  explicit FourfoldEngine(const InterferenceSetup& setup);
  ~FourfoldEngine();
  FourfoldEngine(FourfoldEngine&&) noexcept;
  FourfoldEngine& operator=(FourfoldEngine&&) noexcept;

  /// Unnormalized P(tau), real and >= 0. Refuses delays the grid cannot
  /// resolve.
  double probability(double tau) const;
  /// The two direct terms of the bracket only: P for distinguishable photons.
  double distinguishable(double tau) const;
  /// |Im P(tau)| relative to the direct-term scale; rounding noise only.
  double imaginary_residue(double tau) const;

  long active_nodes() const;
  const InterferenceSetup& setup() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

double fourfold_probability(const InterferenceSetup& setup, double tau);

struct OracleOptions {
  long max_active_nodes = 257;
  double points_per_window = 128.0;
};

/// Independent time-domain evaluation: pair amplitudes psi(t) by discrete
/// Fourier transform of each JSA, antisymmetrized four-time density from the
/// post-beam-splitter state, jitter applied as the detector response, and
/// trapezoid integration over the windows. Agrees with the spectral path up
/// to one global constant (1 with the shared normalization).
double fourfold_probability_oracle(const InterferenceSetup& setup, double tau,
                                   const OracleOptions& options = {});

struct HomCurve {
  std::vector<double> delays;
  std::vector<double> values;          // P(tau)
  std::vector<double> distinguishable; // direct terms at each delay
  double plateau = 0.0;                // P(infinity)
  double dip = 0.0;                    // P(0)
  bool reliable = true;                // false when tau_23 < 4 max T_c
};

/// Evaluates P over `delays`. The plateau is the distinguishable-photon
/// value at tau = 0: the level P(tau) settles to once tau leaves the
/// coherence time while the channel-4 window still sits well inside the
/// tau_23 window.
HomCurve hom_curve(const InterferenceSetup& setup, const std::vector<double>& delays,
                   int threads = 1);

/// (plateau - dip) / plateau. Throws UnreliablePlateauError for flagged
/// curves and ValidationError for a zero plateau.
double visibility(const HomCurve& curve);

/// Identical-source model used for visibility maps and the rate optimizer.
struct VisibilityModel {
  spectral::FilterKind filter = spectral::FilterKind::Rect;
  double bs_window_factor = 8.0;  // tau_23 = factor * T_c
  double nodes_per_fwhm = 32.0;
};

/// Two identical sources of jitter-free coherence time `tc`, one jitter
/// FWHM on all four channels.
InterferenceSetup identical_source_setup(double tc, double tau14, double jitter,
                                         const VisibilityModel& model = {});

double identical_source_visibility(double tc, double tau14, double jitter,
                                   const VisibilityModel& model = {});

struct VisibilityMap {
  std::vector<double> tc_values;
  std::vector<double> tau14_values;
  std::vector<double> v;  // row-major, v[i * tau14_values.size() + k]

  double at(std::size_t i, std::size_t k) const { return v[i * tau14_values.size() + k]; }
};

VisibilityMap visibility_map(const std::vector<double>& tc_values,
                             const std::vector<double>& tau14_values, double jitter,
                             const VisibilityModel& model = {}, int threads = 1);

}  // namespace cwhom::interference
