#include "cwhom/rates.hpp"

#include <cmath>
#include <string>

#include "cwhom/errors.hpp"
#include "cwhom/parallel.hpp"

namespace cwhom::rates {

namespace {

void require_positive(double x, const char* name) {
  if (!(std::isfinite(x) && x > 0.0)) throw ValidationError(std::string(name) + " must be positive");
}

}  // namespace

double cw_fourfold_rate(double mu, double tc, double tau_w, const std::optional<std::array<double, 4>>& etas,
                        bool with_bsm_factor) {
  require_positive(mu, "mu");
  require_positive(tc, "tc");
  require_positive(tau_w, "tau_w");
  const double x = mu / tc;
  double r = x * x * tau_w;
  if (etas) {
    for (double e : *etas) {
      if (!(e >= 0.0 && e <= 1.0)) throw ValidationError("efficiencies must lie in [0, 1]");
      r *= e;
    }
  }
  if (with_bsm_factor) r *= 0.5;
  return r;
}

double pulsed_rate(double mu_p, double tau_p, double tc, double f_rep) {
  require_positive(mu_p, "mu_p");
  require_positive(tau_p, "tau_p");
  require_positive(tc, "tc");
  require_positive(f_rep, "f_rep");
  const double x = mu_p * tau_p / tc;
  return x * x * f_rep;
}

void RateQuery::validate() const {
  if (!(mu > 0.0 && mu <= 0.2)) throw ValidationError("mu must lie in (0, 0.2]");
  if (!(jitter >= 0.0)) throw ValidationError("jitter must be >= 0");
  if (!(v_target > 0.0 && v_target < 1.0)) throw ValidationError("v_target must lie in (0, 1)");
  require_positive(tc_max, "tc_max");
  require_positive(tc_min, "tc_min");
  if (tc_min >= tc_max) throw ValidationError("tc_min must be below tc_max");
  require_positive(tau_w_min, "tau_w_min");
  if (!(tau_w_max > tau_w_min)) throw ValidationError("tau_w range must be increasing");
  if (n_samples < 2) throw ValidationError("need at least 2 tau_w samples");
  if (!(tolerance > 0.0 && tolerance < 1.0)) throw ValidationError("tolerance must lie in (0, 1)");
}

std::optional<RateSample> min_coherence_time(const RateQuery& q, double tau_w) {
  auto vis = [&](double tc) { return interference::identical_source_visibility(tc, tau_w, q.jitter, q.model); };
  RateSample s;
  s.tau_w = tau_w;
  double hi = q.tc_max;
  double v_hi = vis(hi);
  if (v_hi < q.v_target) return std::nullopt;

  // Walk down by halving until the target is missed, then bisect in log T_c.
  double lo = hi;
  for (;;) {
    const double next = std::max(0.5 * lo, q.tc_min);
    if (next == lo) {
      s.tc = lo;
      s.visibility = v_hi;
      s.rate = cw_fourfold_rate(q.mu, s.tc, tau_w);
      s.feasible = true;
      return s;
    }
    const double v = vis(next);
    if (v < q.v_target) {
      lo = next;
      break;
    }
    hi = lo = next;
    v_hi = v;
  }
  while (hi / lo > 1.0 + q.tolerance) {
    const double mid = std::sqrt(lo * hi);
    const double v = vis(mid);
    if (v >= q.v_target) hi = mid, v_hi = v;
    else lo = mid;
  }
  s.tc = hi;
  s.visibility = v_hi;
  s.rate = cw_fourfold_rate(q.mu, s.tc, tau_w);
  s.feasible = true;
  return s;
}

OptResult optimize_window(const RateQuery& q, int threads) {
  q.validate();
  OptResult r;
  r.curve.resize(static_cast<std::size_t>(q.n_samples));
  const double ratio = std::log(q.tau_w_max / q.tau_w_min);
  parallel_for(r.curve.size(), threads, [&](std::size_t k) {
    const double tau_w = q.tau_w_min * std::exp(ratio * static_cast<double>(k) / (q.n_samples - 1));
    if (auto s = min_coherence_time(q, tau_w)) {
      r.curve[k] = *s;
    } else {
      r.curve[k].tau_w = tau_w;
    }
  });
  if (!r.curve.front().feasible)
    throw ValidationError("v_target " + std::to_string(q.v_target) +
                          " is not reachable at tc_max for the smallest tau_w");
  for (const auto& s : r.curve) {
    if (s.feasible && s.rate > r.rate_opt) {
      r.rate_opt = s.rate;
      r.tau_w_opt = s.tau_w;
      r.tc_opt = s.tc;
    }
  }
  return r;
}

void LossProfile::validate() const {
  if (t.empty()) throw ValidationError("loss profile is empty");
  if (loss.size() != t.size()) throw ValidationError("loss profile columns differ in length");
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (!std::isfinite(t[k])) throw ValidationError("loss profile times must be finite");
    if (k > 0 && !(t[k] > t[k - 1])) throw ValidationError("loss profile times must be strictly increasing");
    for (double db : loss[k])
      if (!(db >= 0.0)) throw ValidationError("losses must be >= 0 dB");
  }
}

double pass_swaps(const LossProfile& p, double mu, double tc, double tau_w) {
  p.validate();
  std::vector<double> r(p.t.size());
  for (std::size_t k = 0; k < p.t.size(); ++k) {
    std::array<double, 4> eta{};
    for (std::size_t c = 0; c < 4; ++c) eta[c] = db_to_eta(p.loss[k][c]);
    r[k] = cw_fourfold_rate(mu, tc, tau_w, eta, true);
  }
  double total = 0.0;
  for (std::size_t k = 1; k < r.size(); ++k) total += 0.5 * (r[k] + r[k - 1]) * (p.t[k] - p.t[k - 1]);
  return total;
}

}  // namespace cwhom::rates
