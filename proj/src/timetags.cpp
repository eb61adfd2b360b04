#include "cwhom/timetags.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "cwhom/errors.hpp"
#include "cwhom/parallel.hpp"
#include "cwhom/units.hpp"

namespace cwhom::timetags {

using interference::CoincidenceConfig;

namespace {

std::int64_t to_fs(double t) { return static_cast<std::int64_t>(std::llround(t / kFemto)); }

bool in_unit(double x) { return x >= 0.0 && x <= 1.0; }

/// Inverse-CDF sampler over a tabulated, piecewise-linear density.
class DelaySampler {
 public:
  explicit DelaySampler(const interference::CoherenceCurve& c) : x_(c.delays) {
    if (x_.size() < 2 || c.density.size() != x_.size())
      throw ValidationError("internal delay density needs >= 2 matching samples");
    cdf_.assign(x_.size(), 0.0);
    for (std::size_t k = 1; k < x_.size(); ++k) {
      if (!(x_[k] > x_[k - 1])) throw ValidationError("internal delay abscissae must increase");
      if (c.density[k] < 0.0 || c.density[k - 1] < 0.0)
        throw ValidationError("internal delay density must be >= 0");
      cdf_[k] = cdf_[k - 1] + 0.5 * (c.density[k] + c.density[k - 1]) * (x_[k] - x_[k - 1]);
    }
    if (!(cdf_.back() > 0.0)) throw ValidationError("internal delay density integrates to zero");
    for (auto& v : cdf_) v /= cdf_.back();
  }

  double operator()(double u) const {
    const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.begin()) return x_.front();
    if (it == cdf_.end()) return x_.back();
    const std::size_t k = static_cast<std::size_t>(it - cdf_.begin());
    const double span = cdf_[k] - cdf_[k - 1];
    const double f = span > 0.0 ? (u - cdf_[k - 1]) / span : 0.0;
    return x_[k - 1] + f * (x_[k] - x_[k - 1]);
  }

 private:
  std::vector<double> x_;
  std::vector<double> cdf_;
};

std::vector<double> poisson_times(std::mt19937_64& rng, double rate, double duration) {
  std::vector<double> t;
  if (rate <= 0.0) return t;
  std::exponential_distribution<double> gap(rate);
  for (double now = gap(rng); now < duration; now += gap(rng)) t.push_back(now);
  return t;
}

}  // namespace

void TagStream::validate() const {
  const std::int64_t end = to_fs(duration);
  for (std::size_t k = 0; k < events.size(); ++k) {
    const auto& e = events[k];
    if (e.channel < 1 || e.channel > 4) throw ValidationError("tag channel must be 1..4");
    if (e.timestamp_fs < 0 || e.timestamp_fs > end)
      throw ValidationError("tag timestamp outside [0, duration]");
    if (k > 0 && e.timestamp_fs < events[k - 1].timestamp_fs)
      throw ValidationError("tag stream is not sorted at row " + std::to_string(k));
  }
}

std::array<std::size_t, 4> TagStream::singles() const {
  std::array<std::size_t, 4> n{};
  for (const auto& e : events) ++n[static_cast<std::size_t>(e.channel - 1)];
  return n;
}

void SimScenario::validate() const {
  if (!(pair_rate_a >= 0.0) || !(pair_rate_b >= 0.0)) throw ValidationError("pair rates must be >= 0");
  if (!in_unit(gamma)) throw ValidationError("gamma must lie in [0, 1]");
  if (!(pairing_window >= 0.0)) throw ValidationError("pairing window must be >= 0");
  for (int c = 0; c < 4; ++c) {
    if (!(noise_rates[static_cast<std::size_t>(c)] >= 0.0)) throw ValidationError("noise rates must be >= 0");
    if (!in_unit(etas[static_cast<std::size_t>(c)])) throw ValidationError("etas must lie in [0, 1]");
  }
  detectors.validate();
  if (!(std::isfinite(duration) && duration > 0.0)) throw ValidationError("duration must be positive");
}

TagStream simulate_streams(const SimScenario& s) {
  s.validate();
  std::mt19937_64 rng(s.rng_seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::optional<DelaySampler> delay;
  if (s.internal_delay_density) delay.emplace(*s.internal_delay_density);

  struct Photon {
    int channel;
    double t;
    bool noise = false;
  };
  std::vector<Photon> photons;

  const auto emit_a = poisson_times(rng, s.pair_rate_a, s.duration);
  const auto emit_b = poisson_times(rng, s.pair_rate_b, s.duration);
  auto bs_time = [&](double t) { return delay ? t + (*delay)(unit(rng)) : t; };

  for (double t : emit_a) photons.push_back({1, t});
  for (double t : emit_b) photons.push_back({4, t});

  // Greedy pairing in time order: each A emission takes the earliest
  // unpaired B emission within the pairing window.
  std::vector<long> partner(emit_a.size(), -1);
  {
    std::size_t jb = 0;
    for (std::size_t ia = 0; ia < emit_a.size(); ++ia) {
      while (jb < emit_b.size() && emit_b[jb] < emit_a[ia] - s.pairing_window) ++jb;
      if (jb < emit_b.size() && emit_b[jb] <= emit_a[ia] + s.pairing_window) {
        partner[ia] = static_cast<long>(jb);
        ++jb;
      }
    }
  }
  std::vector<char> b_paired(emit_b.size(), 0);
  for (long p : partner)
    if (p >= 0) b_paired[static_cast<std::size_t>(p)] = 1;

  auto port = [&] { return unit(rng) < 0.5 ? 2 : 3; };
  for (std::size_t ia = 0; ia < emit_a.size(); ++ia) {
    const double ta = bs_time(emit_a[ia]);
    if (partner[ia] < 0) {
      photons.push_back({port(), ta});
      continue;
    }
    const double tb = bs_time(emit_b[static_cast<std::size_t>(partner[ia])]);
    if (unit(rng) < s.gamma) {
      const int p = port();
      photons.push_back({p, ta});
      photons.push_back({p, tb});
    } else {
      const int p = port();
      photons.push_back({p, ta});
      photons.push_back({5 - p, tb});
    }
  }
  for (std::size_t jb = 0; jb < emit_b.size(); ++jb)
    if (!b_paired[jb]) photons.push_back({port(), bs_time(emit_b[jb])});

  for (int c = 0; c < 4; ++c)
    for (double t : poisson_times(rng, s.noise_rates[static_cast<std::size_t>(c)], s.duration))
      photons.push_back({c + 1, t, true});

  TagStream out;
  out.duration = s.duration;
  const std::int64_t end = to_fs(s.duration);
  std::array<std::normal_distribution<double>, 4> jitter;
  for (int c = 0; c < 4; ++c)
    jitter[static_cast<std::size_t>(c)] =
        std::normal_distribution<double>(0.0, std::max(s.detectors.sigma(c), 0.0));
  out.events.reserve(photons.size());
  for (const auto& ph : photons) {
    const auto c = static_cast<std::size_t>(ph.channel - 1);
    // Noise rates are already detected singles; only photons are thinned.
    if (!ph.noise && unit(rng) >= s.etas[c]) continue;
    double t = ph.t;
    if (s.detectors.jitter_fwhm[c] > 0.0) t += jitter[c](rng);
    const std::int64_t fs = to_fs(t);
    if (fs < 0 || fs > end) continue;
    out.events.push_back({ph.channel, fs});
  }
  std::sort(out.events.begin(), out.events.end(), [](const TagEvent& x, const TagEvent& y) {
    return x.timestamp_fs != y.timestamp_fs ? x.timestamp_fs < y.timestamp_fs : x.channel < y.channel;
  });
  return out;
}

ChannelTags split_channels(const TagStream& stream) {
  stream.validate();
  ChannelTags c;
  for (const auto& e : stream.events) c.t[static_cast<std::size_t>(e.channel - 1)].push_back(e.timestamp_fs);
  return c;
}

namespace {

bool any_in(const std::vector<std::int64_t>& v, std::int64_t lo, std::int64_t hi) {
  const auto it = std::lower_bound(v.begin(), v.end(), lo);
  return it != v.end() && *it <= hi;
}

}  // namespace

std::uint64_t count_fourfolds(const ChannelTags& tags, const CoincidenceConfig& cfg, double tau,
                              int threads) {
  cfg.validate();
  for (const auto& ch : tags.t)
    if (!std::is_sorted(ch.begin(), ch.end())) throw ValidationError("channel tags are not sorted");
  const std::int64_t h23 = to_fs(0.5 * cfg.tau_23);
  const std::int64_t h14 = to_fs(0.5 * cfg.tau_14);
  const std::int64_t shift = to_fs(tau);
  const auto& trig = tags.t[0];

  const std::size_t shards = static_cast<std::size_t>(std::max(threads, 1));
  const std::size_t chunk = (trig.size() + shards - 1) / std::max<std::size_t>(shards, 1);
  std::vector<std::uint64_t> partial(shards, 0);
  parallel_for(shards, threads, [&](std::size_t s) {
    const std::size_t lo = s * chunk, hi = std::min(trig.size(), lo + chunk);
    std::uint64_t n = 0;
    for (std::size_t k = lo; k < hi; ++k) {
      const std::int64_t t1 = trig[k];
      if (any_in(tags.t[1], t1 - h23, t1 + h23) && any_in(tags.t[2], t1 - h23, t1 + h23) &&
          any_in(tags.t[3], t1 + shift - h14, t1 + shift + h14))
        ++n;
    }
    partial[s] = n;
  });
  std::uint64_t total = 0;
  for (auto n : partial) total += n;
  return total;
}

std::uint64_t count_fourfolds(const TagStream& stream, const CoincidenceConfig& cfg, double tau, int threads) {
  return count_fourfolds(split_channels(stream), cfg, tau, threads);
}

namespace {

std::uint64_t shifted_count(ChannelTags tags, const CoincidenceConfig& cfg, double delta, int shift_channel,
                            double tau, int threads) {
  cfg.validate();
  if (shift_channel != 2 && shift_channel != 3) throw ValidationError("shift channel must be 2 or 3");
  if (!(delta >= 10.0 * cfg.tau_23))
    throw ValidationError("shift delta must be at least 10 tau_23 to decorrelate the channel");
  const std::int64_t d = to_fs(delta);
  for (auto& t : tags.t[static_cast<std::size_t>(shift_channel - 1)]) t += d;
  return count_fourfolds(tags, cfg, tau, threads);
}

}  // namespace

std::uint64_t shifted_accidentals(const TagStream& stream, const CoincidenceConfig& cfg, double delta,
                                  int shift_channel, double tau, int threads) {
  return shifted_count(split_channels(stream), cfg, delta, shift_channel, tau, threads);
}

FourfoldCounts count_with_accidentals(const TagStream& stream, const CoincidenceConfig& cfg, double tau,
                                      double delta, int threads) {
  const ChannelTags tags = split_channels(stream);
  FourfoldCounts c;
  c.raw = count_fourfolds(tags, cfg, tau, threads);
  c.shifted_2 = shifted_count(tags, cfg, delta, 2, tau, threads);
  c.shifted_3 = shifted_count(tags, cfg, delta, 3, tau, threads);
  c.corrected = static_cast<std::int64_t>(c.raw) - static_cast<std::int64_t>(c.shifted_2) -
                static_cast<std::int64_t>(c.shifted_3);
  return c;
}

void AccidentalParams::validate() const {
  if (!in_unit(mu_c1) || !in_unit(mu_c2) || !in_unit(gamma))
    throw ValidationError("mu_c and gamma must lie in [0, 1]");
  for (int c = 0; c < 4; ++c)
    if (!in_unit(eta[static_cast<std::size_t>(c)]) || !in_unit(p_noise[static_cast<std::size_t>(c)]))
      throw ValidationError("eta and p_noise must lie in [0, 1]");
}

AccidentalTerms analytic_accidentals(const AccidentalParams& p) {
  p.validate();
  const double e1 = p.eta[0], e2 = p.eta[1], e3 = p.eta[2], e4 = p.eta[3];
  const double p1 = p.p_noise[0], p2 = p.p_noise[1], p3 = p.p_noise[2], p4 = p.p_noise[3];
  const double m1 = p.mu_c1, m2 = p.mu_c2, g = p.gamma;

  const double real = (1.0 - g) * m2 * e4 * e3 * m1 * e1 * e2;
  const double same2_noise3 = 0.5 * g * m2 * e4 * m1 * e1 * eta_bar(e2) * p3;
  const double same3_noise2 = 0.5 * g * m2 * e4 * m1 * e1 * eta_bar(e3) * p2;
  const double b_pair_noise12 = 0.5 * m2 * e4 * e3 * p1 * p2;
  const double b_pair_noise13 = 0.5 * m2 * e4 * e2 * p1 * p3;
  const double a_pair_noise43 = p4 * p3 * 0.5 * m1 * e1 * e2;
  const double a_pair_noise42 = p4 * p2 * 0.5 * m1 * e1 * e3;

  AccidentalTerms t;
  t.a0 = real + same2_noise3 + same3_noise2 + b_pair_noise12 + b_pair_noise13 + a_pair_noise43 +
         a_pair_noise42;
  t.as2 = b_pair_noise12 + a_pair_noise42 + same3_noise2;
  t.as3 = a_pair_noise43 + b_pair_noise13 + same2_noise3;
  t.p_real = t.a0 - t.as2 - t.as3;
  return t;
}

AccidentalParams accidental_params_for(const SimScenario& s, const CoincidenceConfig& cfg) {
  s.validate();
  cfg.validate();
  AccidentalParams p;
  p.mu_c1 = s.pair_rate_a * cfg.tau_14;
  p.mu_c2 = s.pair_rate_b * cfg.tau_14;
  p.eta = s.etas;
  p.gamma = s.gamma;
  const double bs_flux = 0.5 * (s.pair_rate_a + s.pair_rate_b);
  p.p_noise = {s.noise_rates[0] * cfg.tau_14, (s.noise_rates[1] + bs_flux * s.etas[1]) * cfg.tau_23,
               (s.noise_rates[2] + bs_flux * s.etas[2]) * cfg.tau_23, s.noise_rates[3] * cfg.tau_14};
  return p;
}

double effective_windows(double duration, const CoincidenceConfig& cfg) {
  cfg.validate();
  return duration / cfg.tau_14;
}

}  // namespace cwhom::timetags
