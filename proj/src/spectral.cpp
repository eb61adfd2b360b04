#include "cwhom/spectral.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "cwhom/errors.hpp"

namespace cwhom::spectral {

namespace {

long odd_at_least(double n) {
  auto k = static_cast<long>(std::ceil(n));
  if (k % 2 == 0) ++k;
  return std::max(k, 3L);
}

bool finite_positive(double x) { return std::isfinite(x) && x > 0.0; }

}  // namespace

FrequencyGrid::FrequencyGrid(long n_points, double span) : n_points_(n_points), span_(span) {
  if (n_points < 3 || n_points % 2 == 0)
    throw ValidationError("grid n_points must be odd and >= 3, got " + std::to_string(n_points));
  if (!finite_positive(span)) throw ValidationError("grid span must be positive");
}

std::vector<double> FrequencyGrid::nodes() const {
  std::vector<double> out(static_cast<std::size_t>(n_points_));
  for (long m = 0; m < n_points_; ++m) out[static_cast<std::size_t>(m)] = node(m);
  return out;
}

double max_step_for(double t_max) {
  if (!finite_positive(t_max)) throw ValidationError("time scale must be positive");
  return kTwoPi / (8.0 * t_max);
}

void check_resolution(const FrequencyGrid& grid, double t_max) {
  const double limit = max_step_for(t_max);
  if (grid.step() <= limit * (1.0 + 1e-12)) return;
  const long required = odd_at_least(2.0 * grid.span() / limit + 1.0);
  throw ResolutionError("frequency grid too coarse: spacing " + std::to_string(grid.step()) +
                            " rad/s exceeds 2*pi/(8*T_max) = " + std::to_string(limit) +
                            " rad/s; need n_points >= " + std::to_string(required),
                        required);
}

FrequencyGrid plan_grid(const GridRequest& r) {
  if (!finite_positive(r.widest_fwhm)) throw ValidationError("grid plan needs a positive filter width");
  if (r.span_factor <= 0.5) throw ValidationError("span_factor must exceed 0.5");
  const double span = r.span_factor * r.widest_fwhm;
  const double narrow = r.narrowest_fwhm > 0.0 ? std::min(r.narrowest_fwhm, r.widest_fwhm) : r.widest_fwhm;
  double step = narrow / r.nodes_per_fwhm;
  if (r.t_max > 0.0) step = std::min(step, max_step_for(r.t_max));
  const long n = std::max(odd_at_least(static_cast<double>(r.min_points)),
                          odd_at_least(2.0 * span / step + 1.0));
  return FrequencyGrid(n, span);
}

SpectralAmplitude::SpectralAmplitude(FrequencyGrid g, std::vector<Complex> values)
    : grid(g), amp(std::move(values)) {
  if (static_cast<long>(amp.size()) != grid.size())
    throw ValidationError("amplitude length does not match grid");
}

std::vector<long> JointSpectralAmplitude::support() const {
  std::vector<long> idx;
  for (std::size_t m = 0; m < values.size(); ++m)
    if (values[m] != Complex{}) idx.push_back(static_cast<long>(m));
  return idx;
}

double JointSpectralAmplitude::max_modulus() const {
  double best = 0.0;
  for (const auto& v : values) best = std::max(best, std::abs(v));
  return best;
}

FilterKind parse_filter_kind(std::string_view name) {
  if (name == "rect") return FilterKind::Rect;
  if (name == "gaussian") return FilterKind::Gaussian;
  if (name == "lorentzian") return FilterKind::Lorentzian;
  if (name == "tabulated") return FilterKind::Tabulated;
  throw ValidationError("unknown filter kind '" + std::string(name) + "'");
}

std::string_view to_string(FilterKind kind) {
  switch (kind) {
    case FilterKind::Rect: return "rect";
    case FilterKind::Gaussian: return "gaussian";
    case FilterKind::Lorentzian: return "lorentzian";
    case FilterKind::Tabulated: return "tabulated";
  }
  return "?";
}

SpectralAmplitude make_filter(FilterKind kind, double fwhm, const FrequencyGrid& grid) {
  if (!finite_positive(fwhm)) throw ValidationError("filter fwhm must be positive");
  if (fwhm > grid.span())
    throw ValidationError("filter fwhm exceeds the grid span; widen the grid");
  if (kind == FilterKind::Tabulated) throw ValidationError("tabulated filters need a table");

  const double h = grid.step();
  const double half = 0.5 * fwhm;
  std::vector<Complex> amp(static_cast<std::size_t>(grid.size()));
  for (long m = 0; m < grid.size(); ++m) {
    const double w = grid.node(m);
    double a = 0.0;
    switch (kind) {
      case FilterKind::Rect: {
        const double lo = std::max(w - 0.5 * h, -half);
        const double hi = std::min(w + 0.5 * h, half);
        a = std::clamp((hi - lo) / h, 0.0, 1.0);
        break;
      }
      case FilterKind::Gaussian:
        a = std::exp(-2.0 * std::numbers::ln2 * (w / fwhm) * (w / fwhm));
        break;
      case FilterKind::Lorentzian:
        a = 1.0 / std::sqrt(1.0 + (w / half) * (w / half));
        break;
      case FilterKind::Tabulated: break;
    }
    amp[static_cast<std::size_t>(m)] = a;
  }
  return SpectralAmplitude(grid, std::move(amp));
}

SpectralAmplitude make_filter(const FilterTable& t, const FrequencyGrid& grid) {
  const std::size_t n = t.omega.size();
  if (n < 2 || t.power.size() != n || (!t.phase.empty() && t.phase.size() != n))
    throw ValidationError("filter table needs >= 2 rows of equal-length columns");
  for (std::size_t k = 0; k < n; ++k) {
    if (!std::isfinite(t.omega[k]) || !std::isfinite(t.power[k]) ||
        (!t.phase.empty() && !std::isfinite(t.phase[k])))
      throw ValidationError("filter table contains non-finite values");
    if (t.power[k] < 0.0 || t.power[k] > 1.0)
      throw ValidationError("filter table power must lie in [0, 1]");
    if (k > 0 && !(t.omega[k] > t.omega[k - 1]))
      throw ValidationError("filter table abscissae must be strictly increasing");
  }

  std::vector<Complex> amp(static_cast<std::size_t>(grid.size()));
  for (long m = 0; m < grid.size(); ++m) {
    const double w = grid.node(m);
    if (w < t.omega.front() || w > t.omega.back()) continue;
    const auto it = std::upper_bound(t.omega.begin(), t.omega.end(), w);
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(it - t.omega.begin()), n - 1);
    const std::size_t j = k - 1;
    const double f = (w - t.omega[j]) / (t.omega[k] - t.omega[j]);
    const double p = t.power[j] + f * (t.power[k] - t.power[j]);
    const double ph = t.phase.empty() ? 0.0 : t.phase[j] + f * (t.phase[k] - t.phase[j]);
    amp[static_cast<std::size_t>(m)] = std::polar(std::sqrt(std::max(p, 0.0)), ph);
  }
  return SpectralAmplitude(grid, std::move(amp));
}

double power_fwhm(const SpectralAmplitude& filter) {
  const long n = filter.grid.size();
  std::vector<double> p(static_cast<std::size_t>(n));
  for (long m = 0; m < n; ++m) p[static_cast<std::size_t>(m)] = std::norm(filter.at(m));
  const auto peak_it = std::max_element(p.begin(), p.end());
  const double half = 0.5 * *peak_it;
  if (!(half > 0.0)) throw ValidationError("filter is identically zero");
  const long peak = peak_it - p.begin();
  auto crossing = [&](long dir) {
    for (long m = peak; m + dir >= 0 && m + dir < n; m += dir) {
      const double a = p[static_cast<std::size_t>(m)];
      const double b = p[static_cast<std::size_t>(m + dir)];
      if (b < half) {
        const double f = (a - half) / (a - b);
        return filter.grid.node(m) + dir * f * filter.grid.step();
      }
    }
    throw ValidationError("filter does not fall to half maximum inside the grid");
  };
  return crossing(+1) - crossing(-1);
}

double filter_fwhm_for_coherence_time(FilterKind kind, double coherence_time) {
  if (!finite_positive(coherence_time)) throw ValidationError("coherence time must be positive");
  switch (kind) {
    case FilterKind::Rect: return 4.0 * kSincSquaredHalfPoint / coherence_time;
    case FilterKind::Gaussian:
      // The pair amplitude F(W)F(-W) is Gaussian with 1/sqrt(2) of the
      // filter's power width, and G is its transform squared.
      return 4.0 * std::numbers::ln2 * std::numbers::sqrt2 / coherence_time;
    default:
      throw ValidationError("coherence-time parameterization is defined for rect and gaussian filters");
  }
}

// ---------------------------------------------------------------------------
// FBG transfer matrices

void FbgModel::validate() const {
  if (!finite_positive(length)) throw ValidationError("fbg length must be positive");
  if (n_sections < 16) throw ValidationError("fbg n_sections must be >= 16");
  if (!std::isfinite(peak_kappa) || peak_kappa < 0.0)
    throw ValidationError("fbg peak_kappa must be nonnegative");
  if (!(order >= 1.0)) throw ValidationError("fbg order must be >= 1");
  if (!(width_fraction > 0.0 && width_fraction <= 1.0))
    throw ValidationError("fbg width_fraction must lie in (0, 1]");
  if (!std::isfinite(detuning_offset)) throw ValidationError("fbg detuning_offset must be finite");
  if (!finite_positive(design_wavelength)) throw ValidationError("fbg design_wavelength must be positive");
  if (!finite_positive(effective_index)) throw ValidationError("fbg effective_index must be positive");
}

double FbgModel::kappa_at(double x) const {
  const double u = std::abs(x) / width_fraction;
  if (std::isinf(order)) return u <= 1.0 ? peak_kappa : 0.0;
  return peak_kappa * std::exp(-std::pow(u, 2.0 * order));
}

namespace {

struct Mat2 {
  Complex a, b, c, d;
};

Mat2 mul(const Mat2& x, const Mat2& y) {
  return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d, x.c * y.a + x.d * y.c,
          x.c * y.b + x.d * y.d};
}

struct RT {
  Complex r, t;
};

/// Chains section matrices for every detuning at once. Each row is
/// renormalized after every step and the scale carried in logarithms, so
/// strong gratings do not overflow.
std::vector<RT> transfer(const FbgModel& m, std::span<const double> omegas) {
  m.validate();
  const std::size_t n = omegas.size();
  const double dz = m.length / m.n_sections;
  const double k0 = m.effective_index / kSpeedOfLight;

  std::vector<double> kappa(static_cast<std::size_t>(m.n_sections));
  for (int s = 0; s < m.n_sections; ++s)
    kappa[static_cast<std::size_t>(s)] = m.kappa_at(2.0 * (s + 0.5) / m.n_sections - 1.0);

  std::vector<Mat2> acc(n, Mat2{1.0, 0.0, 0.0, 1.0});
  std::vector<double> log_scale(n, 0.0);
  const Complex I(0.0, 1.0);
  for (int s = 0; s < m.n_sections; ++s) {
    const double kap = kappa[static_cast<std::size_t>(s)];
    for (std::size_t q = 0; q < n; ++q) {
      const double sig = k0 * (omegas[q] - m.detuning_offset);
      const Complex gamma = std::sqrt(Complex(kap * kap - sig * sig, 0.0));
      const Complex gz = gamma * dz;
      Complex ch, shg;  // cosh(gamma dz), sinh(gamma dz)/gamma
      if (std::abs(gz) < 1e-5) {
        ch = 1.0 + 0.5 * gz * gz;
        shg = dz * (1.0 + gz * gz / 6.0);
      } else {
        ch = std::cosh(gz);
        shg = std::sinh(gz) / gamma;
      }
      const Mat2 f{ch - I * sig * shg, -I * kap * shg, I * kap * shg, ch + I * sig * shg};
      Mat2 x = mul(f, acc[q]);
      const double big = std::max({std::abs(x.a), std::abs(x.b), std::abs(x.c), std::abs(x.d)});
      if (big > 1e50) {
        x.a /= big, x.b /= big, x.c /= big, x.d /= big;
        log_scale[q] += std::log(big);
      }
      acc[q] = x;
    }
  }

  std::vector<RT> out(n);
  for (std::size_t q = 0; q < n; ++q) {
    const Mat2& x = acc[q];
    const Complex r = x.c / x.a;
    const Complex t = std::exp(-log_scale[q]) / x.a;
    if (!std::isfinite(r.real()) || !std::isfinite(r.imag()) || !std::isfinite(t.real()) ||
        !std::isfinite(t.imag()))
      throw InvalidModelError("fbg transfer matrix produced non-finite values");
    out[q] = {r, t};
  }
  return out;
}

}  // namespace

FbgSpectrum fbg_spectrum(const FbgModel& model, const FrequencyGrid& grid) {
  const auto w = grid.nodes();
  const auto rt = transfer(model, w);
  std::vector<Complex> r(rt.size()), t(rt.size());
  for (std::size_t q = 0; q < rt.size(); ++q) r[q] = rt[q].r, t[q] = rt[q].t;
  return {SpectralAmplitude(grid, std::move(r)), SpectralAmplitude(grid, std::move(t))};
}

SpectralAmplitude fbg_response(const FbgModel& model, const FrequencyGrid& grid) {
  auto r = fbg_spectrum(model, grid).reflection;
  // Strip the band-averaged group delay. A pure delay of one arm is what the
  // fibre-length calibration zeroes in the lab; left in, gratings of
  // different length would pull the dip away from tau = 0.
  double num = 0.0, den = 0.0;
  for (std::size_t m = 0; m + 1 < r.amp.size(); ++m) {
    const Complex z = r.amp[m + 1] * std::conj(r.amp[m]);
    const double w = std::abs(z);
    if (w == 0.0) continue;
    num += w * std::arg(z);
    den += w;
  }
  if (den > 0.0) {
    const double delay = num / den / grid.step();
    for (long m = 0; m < grid.size(); ++m)
      r.amp[static_cast<std::size_t>(m)] *= std::polar(1.0, -delay * grid.node(m));
  }
  return r;
}

std::vector<double> fbg_reflectance(const FbgModel& model, std::span<const double> omegas) {
  const auto rt = transfer(model, omegas);
  std::vector<double> out(rt.size());
  for (std::size_t q = 0; q < rt.size(); ++q) out[q] = std::norm(rt[q].r);
  return out;
}

double fbg_fwhm(const FbgModel& model) {
  // Bandwidth in coupled-mode detuning units is at most of order
  // kappa + pi/L; scan a generous window, then bracket each half-point.
  const double to_omega = kSpeedOfLight / model.effective_index;
  const double reach = 6.0 * (model.peak_kappa + kTwoPi / model.length) * to_omega;
  const int n_scan = 4001;
  std::vector<double> w(n_scan);
  for (int k = 0; k < n_scan; ++k)
    w[static_cast<std::size_t>(k)] = model.detuning_offset - reach + 2.0 * reach * k / (n_scan - 1);
  const auto p = fbg_reflectance(model, w);
  const auto peak_it = std::max_element(p.begin(), p.end());
  const double half = 0.5 * *peak_it;
  if (!(half > 0.0)) throw ValidationError("fbg has no reflection band");
  const long peak = peak_it - p.begin();

  auto refine = [&](double inside, double outside) {
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (inside + outside);
      const double v = fbg_reflectance(model, std::span<const double>(&mid, 1))[0];
      (v >= half ? inside : outside) = mid;
    }
    return 0.5 * (inside + outside);
  };
  auto edge = [&](long dir) {
    for (long k = peak; k + dir >= 0 && k + dir < n_scan; k += dir)
      if (p[static_cast<std::size_t>(k + dir)] < half)
        return refine(w[static_cast<std::size_t>(k)], w[static_cast<std::size_t>(k + dir)]);
    throw ValidationError("fbg reflectance does not fall to half maximum");
  };
  return edge(+1) - edge(-1);
}

FbgModel design_fbg(double fwhm, const FbgShape& shape, double design_wavelength) {
  if (!finite_positive(fwhm)) throw ValidationError("fbg target fwhm must be positive");
  if (!finite_positive(shape.kappa_length)) throw ValidationError("fbg kappa*L must be positive");
  FbgModel unit;
  unit.length = 1.0;
  unit.peak_kappa = shape.kappa_length;
  unit.order = shape.order;
  unit.width_fraction = shape.width_fraction;
  unit.n_sections = shape.n_sections;
  unit.effective_index = shape.effective_index;
  unit.design_wavelength = design_wavelength;
  const double unit_fwhm = fbg_fwhm(unit);
  FbgModel out = unit;
  out.length = unit_fwhm / fwhm;
  out.peak_kappa = shape.kappa_length / out.length;
  return out;
}

double fbg_residual(const FbgModel& model, std::span<const ReflectanceSample> measured) {
  std::vector<double> w(measured.size());
  for (std::size_t k = 0; k < measured.size(); ++k) w[k] = measured[k].omega;
  const auto p = fbg_reflectance(model, w);
  double sse = 0.0;
  for (std::size_t k = 0; k < measured.size(); ++k) {
    const double d = p[k] - measured[k].reflectance;
    sse += d * d;
  }
  return sse;
}

namespace {

constexpr int kDim = 5;
using Vec = std::array<double, kDim>;

struct Simplex {
  Vec x;
  int iterations;
  double value;
};

/// Standard Nelder-Mead (reflection 1, expansion 2, contraction 1/2,
/// shrink 1/2) from an axis-aligned initial simplex.
template <class F>
Simplex nelder_mead(F&& f, const Vec& start, const Vec& steps, int max_iter, double tol) {
  std::array<Vec, kDim + 1> pts;
  std::array<double, kDim + 1> val;
  pts[0] = start;
  for (int i = 0; i < kDim; ++i) {
    pts[i + 1] = start;
    pts[i + 1][i] += steps[i];
  }
  for (int i = 0; i <= kDim; ++i) val[i] = f(pts[i]);

  std::array<int, kDim + 1> order;
  int it = 0;
  for (; it < max_iter; ++it) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return val[a] < val[b]; });
    const int best = order[0], worst = order[kDim], second = order[kDim - 1];
    if (val[worst] - val[best] <= tol * (1.0 + std::abs(val[best]))) break;

    Vec c{};
    for (int i = 0; i <= kDim; ++i)
      if (i != worst)
        for (int d = 0; d < kDim; ++d) c[d] += pts[i][d] / kDim;
    auto along = [&](double t) {
      Vec y;
      for (int d = 0; d < kDim; ++d) y[d] = c[d] + t * (pts[worst][d] - c[d]);
      return y;
    };

    const Vec xr = along(-1.0);
    const double fr = f(xr);
    if (fr < val[best]) {
      const Vec xe = along(-2.0);
      const double fe = f(xe);
      if (fe < fr) pts[worst] = xe, val[worst] = fe;
      else pts[worst] = xr, val[worst] = fr;
      continue;
    }
    if (fr < val[second]) {
      pts[worst] = xr, val[worst] = fr;
      continue;
    }
    const bool outside = fr < val[worst];
    const Vec xc = along(outside ? -0.5 : 0.5);
    const double fc = f(xc);
    if (fc < (outside ? fr : val[worst])) {
      pts[worst] = xc, val[worst] = fc;
      continue;
    }
    for (int i = 0; i <= kDim; ++i) {
      if (i == best) continue;
      for (int d = 0; d < kDim; ++d) pts[i][d] = pts[best][d] + 0.5 * (pts[i][d] - pts[best][d]);
      val[i] = f(pts[i]);
    }
  }
  const int best = static_cast<int>(std::min_element(val.begin(), val.end()) - val.begin());
  return {pts[best], it, val[best]};
}

}  // namespace

FbgFitResult fit_fbg(std::span<const ReflectanceSample> measured, const FbgModel& seed,
                     const FitOptions& options) {
  seed.validate();
  if (measured.size() < 20) throw ValidationError("fbg fit needs at least 20 measurement points");
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  double w_lo = lo, w_hi = hi;
  for (const auto& s : measured) {
    if (!std::isfinite(s.omega) || !std::isfinite(s.reflectance))
      throw ValidationError("fbg fit input contains non-finite values");
    if (s.reflectance < 0.0 || s.reflectance > 1.0)
      throw ValidationError("measured reflectance must lie in [0, 1]");
    lo = std::min(lo, s.reflectance), hi = std::max(hi, s.reflectance);
    w_lo = std::min(w_lo, s.omega), w_hi = std::max(w_hi, s.omega);
  }
  if (hi - lo <= 0.0) throw ValidationError("measured reflectance is flat; nothing to fit");

  // Unconstrained coordinates: log length, log kappa, log order, width
  // fraction, offset in units of the measured span. A uniform seed keeps its
  // order fixed.
  const bool uniform = std::isinf(seed.order);
  const double w_unit = w_hi - w_lo;
  auto decode = [&](const Vec& x) {
    FbgModel m = seed;
    m.length = std::exp(x[0]);
    m.peak_kappa = std::exp(x[1]);
    if (!uniform) m.order = std::exp(x[2]);
    m.width_fraction = x[3];
    m.detuning_offset = x[4] * w_unit;
    return m;
  };
  auto encode = [&](const FbgModel& m) {
    return Vec{std::log(m.length), std::log(std::max(m.peak_kappa, 1e-300)),
               uniform ? 0.0 : std::log(m.order), m.width_fraction, m.detuning_offset / w_unit};
  };
  auto objective = [&](const Vec& x) {
    if (!(x[2] >= 0.0 || uniform) || !(x[3] > 0.0 && x[3] <= 1.0) || x[0] > 10.0 || x[1] > 30.0)
      return std::numeric_limits<double>::infinity();
    try {
      return fbg_residual(decode(x), measured);
    } catch (const InvalidModelError&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  FbgFitResult result;
  result.model = seed;
  result.seed_residual = fbg_residual(seed, measured);
  result.residual = result.seed_residual;
  result.iterations = 0;
  if (result.seed_residual == 0.0) return result;

  const Vec x0 = encode(seed);
  const Vec steps{0.05, 0.05, uniform ? 0.0 : 0.1, -0.05, 0.01};
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> jitter(0.0, 1.0);

  for (int run = 0; run <= options.restarts; ++run) {
    Vec start = x0;
    if (run > 0) {
      start[0] += 0.15 * jitter(rng);
      start[1] += 0.15 * jitter(rng);
      if (!uniform) start[2] = std::max(0.0, start[2] + 0.2 * jitter(rng));
      start[3] = std::clamp(start[3] + 0.1 * jitter(rng), 0.1, 1.0);
      start[4] += 0.02 * jitter(rng);
    }
    Vec st = steps;
    if (start[3] + st[3] <= 0.0) st[3] = -st[3];
    const Simplex s = nelder_mead(objective, start, st, options.max_iterations, options.tolerance);
    const bool better = s.value < result.residual ||
                        (s.value == result.residual && s.iterations < result.iterations);
    if (better) {
      result.model = decode(s.x);
      result.residual = s.value;
      result.iterations = s.iterations;
    }
  }
  return result;
}

JointSpectralAmplitude joint_spectral_amplitude(const SpectralAmplitude& signal,
                                                const SpectralAmplitude& idler,
                                                const std::optional<SpectralAmplitude>& pump,
                                                bool normalize) {
  if (!(signal.grid == idler.grid) || (pump && !(pump->grid == signal.grid)))
    throw ValidationError("joint spectral amplitude needs filters on one grid");
  const FrequencyGrid& g = signal.grid;
  JointSpectralAmplitude j{g, std::vector<Complex>(static_cast<std::size_t>(g.size()))};
  for (long m = 0; m < g.size(); ++m) {
    Complex v = signal.at(m) * idler.at(g.mirror(m));
    if (pump) v *= pump->at(m);
    j.values[static_cast<std::size_t>(m)] = v;
  }
  if (normalize) {
    const double peak = j.max_modulus();
    if (!(peak > 0.0)) throw ValidationError("joint spectral amplitude is identically zero");
    for (auto& v : j.values) v /= peak;
  }
  return j;
}

}  // namespace cwhom::spectral
