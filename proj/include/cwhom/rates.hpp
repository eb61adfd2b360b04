#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "cwhom/interference.hpp"

namespace cwhom::rates {

/// Fourfold rate of two CW sources that must both emit inside one window:
/// R = (mu / T_c)^2 tau_w, optionally times eta1 eta2 eta3 eta4 and the
/// linear-optics Bell-measurement success probability 1/2.
/// The formula assumes tau_w <= T_c; larger windows are accepted.
double cw_fourfold_rate(double mu, double tc, double tau_w,
                        const std::optional<std::array<double, 4>>& etas = std::nullopt,
                        bool with_bsm_factor = false);

/// Pulsed counterpart: (mu_p tau_p / T_c)^2 f_rep.
double pulsed_rate(double mu_p, double tau_p, double tc, double f_rep);

struct RateQuery {
  double mu = 0.01;
  double jitter = 15e-12;       // s, on all four channels
  double v_target = 0.95;
  double tc_max = 800e-12;      // s
  double tc_min = 1e-12;        // s, feasibility floor of the T_c search
  double tau_w_min = 5e-12;     // s
  double tau_w_max = 1e-9;      // s
  int n_samples = 40;           // logarithmic
  double tolerance = 0.05;      // relative bracket on T_c
  interference::VisibilityModel model{};

  void validate() const;
};

struct RateSample {
  double tau_w = 0.0;
  double tc = 0.0;          // smallest T_c meeting v_target (0 if infeasible)
  double rate = 0.0;        // 0 if infeasible
  double visibility = 0.0;  // at tc
  bool feasible = false;
};

struct OptResult {
  double tau_w_opt = 0.0;
  double tc_opt = 0.0;
  double rate_opt = 0.0;
  std::vector<RateSample> curve;
};

/// Smallest T_c in [tc_min, tc_max] with V(T_c, tau_w) >= v_target, to
/// `tolerance` relative. Empty when even tc_max misses the target.
std::optional<RateSample> min_coherence_time(const RateQuery& q, double tau_w);

/// Scans tau_w logarithmically; at each sample the coherence time is the
/// smallest that keeps the target visibility, and R = (mu/T_c)^2 tau_w.
/// Throws ValidationError if the target is infeasible at the smallest tau_w.
OptResult optimize_window(const RateQuery& q, int threads = 1);

struct LossProfile {
  std::vector<double> t;                    // s, strictly increasing
  std::vector<std::array<double, 4>> loss;  // dB per channel, >= 0 (inf allowed)

  void validate() const;
};

inline double db_to_eta(double db) { return std::pow(10.0, -db / 10.0); }

/// Expected Bell-state measurements over the profile: trapezoid integral of
/// the CW rate with eta_i(t) and the 1/2 measurement factor.
double pass_swaps(const LossProfile& profile, double mu, double tc, double tau_w);

}  // namespace cwhom::rates
