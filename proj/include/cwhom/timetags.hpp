#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "cwhom/detection.hpp"
#include "cwhom/interference.hpp"

namespace cwhom::timetags {

/// Channels are encoded 1, 2, 3, 4 (2 = 2', 3 = 3').
struct TagEvent {
  int channel;
  std::int64_t timestamp_fs;

  friend bool operator==(const TagEvent&, const TagEvent&) = default;
};

struct TagStream {
  std::vector<TagEvent> events;  // ascending timestamps
  double duration = 0.0;         // s

  /// Throws ValidationError if unsorted, out of range or on a bad channel.
  void validate() const;
  std::array<std::size_t, 4> singles() const;
};

struct SimScenario {
  double pair_rate_a = 0.0;  // pairs/s
  double pair_rate_b = 0.0;
  /// Signal-idler delay density; absent = zero internal delay.
  std::optional<interference::CoherenceCurve> internal_delay_density;
  /// Probability that two coincident beam-splitter photons leave by one port.
  double gamma = 0.5;
  /// Emissions of A and B closer than this are treated as one interfering
  /// pair at the beam splitter; everything else routes 50/50 on its own.
  double pairing_window = 20e-12;  // s
  /// Uncorrelated singles per channel [1/s], already as detected counts
  /// (not thinned by `etas`).
  std::array<double, 4> noise_rates{0.0, 0.0, 0.0, 0.0};
  std::array<double, 4> etas{1.0, 1.0, 1.0, 1.0};
  detection::DetectorModel detectors{{0.0, 0.0, 0.0, 0.0}};
  double duration = 1e-3;  // s
  std::uint64_t rng_seed = 1;

  void validate() const;
};

/// Poisson pair emission for both sources, beam-splitter routing, per-channel
/// thinning, Poisson noise and Gaussian jitter. Single-threaded and fully
/// determined by `rng_seed`.
TagStream simulate_streams(const SimScenario& scenario);

/// Per-channel sorted timestamps, the form the counters work on.
struct ChannelTags {
  std::array<std::vector<std::int64_t>, 4> t;
};

ChannelTags split_channels(const TagStream& stream);

/// One fourfold per channel-1 trigger when 2' and 3' each have a tag within
/// +-tau_23/2 of the trigger and 4 has one within tau +- tau_14/2.
/// Triggers are sharded across `threads`.
std::uint64_t count_fourfolds(const TagStream& stream, const interference::CoincidenceConfig& cfg,
                              double tau, int threads = 1);
std::uint64_t count_fourfolds(const ChannelTags& tags, const interference::CoincidenceConfig& cfg,
                              double tau, int threads = 1);

/// Count after delaying every tag of `shift_channel` (2 or 3) by `delta`,
/// which must be at least 10 tau_23.
std::uint64_t shifted_accidentals(const TagStream& stream, const interference::CoincidenceConfig& cfg,
                                  double delta, int shift_channel, double tau = 0.0, int threads = 1);

struct FourfoldCounts {
  std::uint64_t raw = 0;
  std::uint64_t shifted_2 = 0;
  std::uint64_t shifted_3 = 0;
  std::int64_t corrected = 0;  // raw - shifted_2 - shifted_3
};

FourfoldCounts count_with_accidentals(const TagStream& stream, const interference::CoincidenceConfig& cfg,
                                      double tau, double delta, int threads = 1);

struct AccidentalParams {
  double mu_c1 = 0.0;
  double mu_c2 = 0.0;
  std::array<double, 4> eta{1.0, 1.0, 1.0, 1.0};
  std::array<double, 4> p_noise{0.0, 0.0, 0.0, 0.0};
  double gamma = 0.0;

  void validate() const;
};

struct AccidentalTerms {
  double a0 = 0.0;
  double as2 = 0.0;
  double as3 = 0.0;
  double p_real = 0.0;  // a0 - as2 - as3
};

/// At least one of two photons entering a channel is detected.
inline double eta_bar(double eta) { return 1.0 - (1.0 - eta) * (1.0 - eta); }

/// Fourfold probabilities per coincidence window: the raw total A0, the
/// two single-shift estimates, and what remains after subtracting both.
AccidentalTerms analytic_accidentals(const AccidentalParams& p);

/// Leading-order per-window probabilities implied by a simulation scenario:
/// mu_c = pair rate * tau_14 (herald must land in the channel-4 window),
/// P_1, P_4 from noise over tau_14, and P_2', P_3' from noise plus the
/// beam-splitter photons of unrelated pairs over tau_23.
AccidentalParams accidental_params_for(const SimScenario& s, const interference::CoincidenceConfig& cfg);

/// Number of trigger windows a stream represents: duration / tau_14.
double effective_windows(double duration, const interference::CoincidenceConfig& cfg);

}  // namespace cwhom::timetags
