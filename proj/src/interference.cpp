#include "cwhom/interference.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

#include "cwhom/errors.hpp"
#include "cwhom/parallel.hpp"
#include "cwhom/units.hpp"

namespace cwhom::interference {

using spectral::Complex;
using spectral::FrequencyGrid;
using detection::jitter_kernel;

void CoincidenceConfig::validate() const {
  if (!(std::isfinite(tau_14) && tau_14 > 0.0)) throw ValidationError("tau_14 must be positive");
  if (!(std::isfinite(tau_23) && tau_23 > 0.0)) throw ValidationError("tau_23 must be positive");
  if (trigger_channel != 1) throw ValidationError("trigger channel is fixed to 1");
}

void InterferenceSetup::validate() const {
  if (!(jsa_a.grid == jsa_b.grid)) throw ValidationError("both sources must share one frequency grid");
  if (static_cast<long>(jsa_a.values.size()) != jsa_a.grid.size() ||
      static_cast<long>(jsa_b.values.size()) != jsa_b.grid.size())
    throw ValidationError("JSA length does not match its grid");
  detectors.validate();
  windows.validate();
  if (tc_a < 0.0 || tc_b < 0.0) throw ValidationError("coherence times must be >= 0");
}

// ---------------------------------------------------------------------------
// Coherence function

namespace {

/// The double sum only depends on the index difference d on a uniform grid:
/// G(tau) = sum_d K(d dW) R_d e^{-i d dW tau},  R_d = sum_m J_m J*_{m+d}.
struct LagSum {
  std::vector<Complex> weight;  // K_d R_d dW^2, d = -(n-1) .. n-1
  long n;
  double step;

  LagSum(const JointSpectralAmplitude& jsa, double jit_s, double jit_i) {
    const auto& v = jsa.values;
    n = static_cast<long>(v.size());
    step = jsa.grid.step();
    const auto support = jsa.support();
    const long lo = support.empty() ? 0 : support.front();
    const long hi = support.empty() ? -1 : support.back();
    weight.assign(static_cast<std::size_t>(2 * n - 1), Complex{});
    for (long d = -(hi - lo); d <= hi - lo; ++d) {
      Complex r{};
      for (long m = std::max(lo, lo - d); m <= std::min(hi, hi - d); ++m)
        r += v[static_cast<std::size_t>(m)] * std::conj(v[static_cast<std::size_t>(m + d)]);
      const double dw = static_cast<double>(d) * step;
      weight[static_cast<std::size_t>(d + n - 1)] =
          r * jitter_kernel(jit_s, dw) * jitter_kernel(jit_i, dw) * step * step;
    }
  }

  double operator()(double tau) const {
    double g = 0.0;
    for (long d = -(n - 1); d <= n - 1; ++d) {
      const Complex w = weight[static_cast<std::size_t>(d + n - 1)];
      if (w == Complex{}) continue;
      const double ph = -static_cast<double>(d) * step * tau;
      g += w.real() * std::cos(ph) - w.imag() * std::sin(ph);
    }
    return std::max(g, 0.0);
  }
};

double fwhm_of_samples(const std::vector<double>& x, const std::vector<double>& y) {
  const auto peak_it = std::max_element(y.begin(), y.end());
  const double half = 0.5 * *peak_it;
  if (!(half > 0.0)) throw ValidationError("coherence function vanishes on the sampled delays");
  const long peak = peak_it - y.begin();
  const long n = static_cast<long>(y.size());
  auto edge = [&](long dir) {
    for (long k = peak; k + dir >= 0 && k + dir < n; k += dir) {
      const double a = y[static_cast<std::size_t>(k)], b = y[static_cast<std::size_t>(k + dir)];
      if (b < half) {
        const double f = (a - half) / (a - b);
        const double xa = x[static_cast<std::size_t>(k)], xb = x[static_cast<std::size_t>(k + dir)];
        return xa + f * (xb - xa);
      }
    }
    throw ValidationError("delay span too short to bracket the half maximum; widen the delays");
  };
  return edge(+1) - edge(-1);
}

/// Width of |J|^2 around its peak, used only to guess a delay span.
double jsa_power_width(const JointSpectralAmplitude& jsa) {
  std::vector<double> p(jsa.values.size());
  for (std::size_t m = 0; m < p.size(); ++m) p[m] = std::norm(jsa.values[m]);
  const auto peak_it = std::max_element(p.begin(), p.end());
  const double half = 0.5 * *peak_it;
  const long peak = peak_it - p.begin();
  long lo = peak, hi = peak;
  while (lo > 0 && p[static_cast<std::size_t>(lo - 1)] >= half) --lo;
  while (hi + 1 < static_cast<long>(p.size()) && p[static_cast<std::size_t>(hi + 1)] >= half) ++hi;
  return static_cast<double>(hi - lo + 1) * jsa.grid.step();
}

}  // namespace

CoherenceCurve coherence_function(const JointSpectralAmplitude& jsa, double jit_s, double jit_i,
                                  const std::vector<double>& delays) {
  if (delays.size() < 3) throw ValidationError("coherence function needs at least 3 delays");
  for (std::size_t k = 1; k < delays.size(); ++k)
    if (!(delays[k] > delays[k - 1])) throw ValidationError("delays must be strictly increasing");
  if (jsa.max_modulus() == 0.0) throw ValidationError("JSA is identically zero");
  const LagSum g(jsa, jit_s, jit_i);
  CoherenceCurve out;
  out.delays = delays;
  out.density.resize(delays.size());
  for (std::size_t k = 0; k < delays.size(); ++k) out.density[k] = g(delays[k]);
  out.t_c_fwhm = fwhm_of_samples(out.delays, out.density);
  return out;
}

std::vector<double> symmetric_delays(double half_span, long n) {
  if (!(half_span > 0.0)) throw ValidationError("delay half-span must be positive");
  if (n < 3) n = 3;
  if (n % 2 == 0) ++n;
  std::vector<double> d(static_cast<std::size_t>(n));
  for (long k = 0; k < n; ++k)
    d[static_cast<std::size_t>(k)] = -half_span + 2.0 * half_span * k / static_cast<double>(n - 1);
  d[static_cast<std::size_t>(n / 2)] = 0.0;
  return d;
}

double coherence_time(const JointSpectralAmplitude& jsa, double jit_s, double jit_i) {
  if (jsa.max_modulus() == 0.0) throw ValidationError("JSA is identically zero");
  const double guess = 4.0 * spectral::kSincSquaredHalfPoint / jsa_power_width(jsa);
  const double period = kTwoPi / jsa.grid.step();
  double half = 3.0 * guess + 2.0 * std::max(jit_s, jit_i);
  const LagSum g(jsa, jit_s, jit_i);
  for (int attempt = 0; attempt < 12; ++attempt, half *= 2.0) {
    half = std::min(half, 0.5 * period);
    const auto d = symmetric_delays(half, 1601);
    std::vector<double> y(d.size());
    for (std::size_t k = 0; k < d.size(); ++k) y[k] = g(d[k]);
    try {
      return fwhm_of_samples(d, y);
    } catch (const ValidationError&) {
      if (half >= 0.5 * period) break;
    }
  }
  throw ValidationError("coherence function never falls to half maximum within the grid period");
}

double resolution_time_scale(const InterferenceSetup& s, double tau) {
  const double tc_a = s.tc_a > 0.0 ? s.tc_a : coherence_time(s.jsa_a);
  const double tc_b = s.tc_b > 0.0 ? s.tc_b : coherence_time(s.jsa_b);
  return std::max({s.windows.tau_14, s.windows.tau_23, std::abs(tau), tc_a, tc_b});
}

// ---------------------------------------------------------------------------
// Spectral engine

struct FourfoldEngine::Impl {
  explicit Impl(const InterferenceSetup& s) : setup(s) {}

  InterferenceSetup setup;
  double tc_a = 0.0, tc_b = 0.0;
  std::vector<double> omega;
  Eigen::VectorXcd b;
  Eigen::MatrixXd m_re, m_im, m_direct, m_abs;
  double dw4 = 0.0;

  void check(double tau) const {
    const double t_max = std::max({setup.windows.tau_14, setup.windows.tau_23, std::abs(tau), tc_a, tc_b});
    spectral::check_resolution(setup.jsa_a.grid, t_max);
  }

  Eigen::VectorXcd shifted(double tau) const {
    Eigen::VectorXcd x(b.size());
    for (Eigen::Index m = 0; m < b.size(); ++m)
      x[m] = b[m] * std::polar(1.0, -omega[static_cast<std::size_t>(m)] * tau);
    return x;
  }

  /// x^T M conj(x) for M = m_re + i m_im, returned as (real, imag).
  Complex form(const Eigen::VectorXcd& x) const {
    const Eigen::VectorXd xr = x.real(), xi = x.imag();
    const Eigen::VectorXd yr = m_re * xr + m_im * xi;
    const Eigen::VectorXd yi = m_im * xr - m_re * xi;
    return {xr.dot(yr) - xi.dot(yi), xr.dot(yi) + xi.dot(yr)};
  }

  /// |x|^T |M| |x|: the size the terms had before they cancelled. Far
  /// outside the dip the direct part alone is too small a yardstick.
  double magnitude(const Eigen::VectorXcd& x) const {
    const Eigen::VectorXd ax = x.cwiseAbs();
    return ax.dot(m_abs * ax);
  }

  double direct(const Eigen::VectorXcd& x) const {
    const Eigen::VectorXd xr = x.real(), xi = x.imag();
    return xr.dot(m_direct * xr) + xi.dot(m_direct * xi);
  }
};

FourfoldEngine::FourfoldEngine(const InterferenceSetup& setup) {
  setup.validate();
  impl_ = std::make_unique<Impl>(setup);
  Impl& s = *impl_;
  s.tc_a = setup.tc_a > 0.0 ? setup.tc_a : coherence_time(setup.jsa_a);
  s.tc_b = setup.tc_b > 0.0 ? setup.tc_b : coherence_time(setup.jsa_b);
  s.check(0.0);

  const FrequencyGrid& grid = setup.jsa_a.grid;
  const auto& ja = setup.jsa_a.values;
  const auto& jb = setup.jsa_b.values;
  std::vector<long> idx;
  for (long m = 0; m < grid.size(); ++m)
    if (ja[static_cast<std::size_t>(m)] != Complex{} || jb[static_cast<std::size_t>(m)] != Complex{})
      idx.push_back(m);
  if (idx.empty()) throw ValidationError("both JSAs are identically zero");

  const auto n = static_cast<Eigen::Index>(idx.size());
  s.omega.resize(idx.size());
  Eigen::VectorXcd a(n);
  s.b.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const long m = idx[static_cast<std::size_t>(k)];
    s.omega[static_cast<std::size_t>(k)] = grid.node(m);
    a[k] = ja[static_cast<std::size_t>(m)];
    s.b[k] = jb[static_cast<std::size_t>(m)];
  }
  const double h = grid.step();
  s.dw4 = h * h * h * h;

  const auto& jit = setup.detectors.jitter_fwhm;
  const double t14 = setup.windows.tau_14, t23 = setup.windows.tau_23;
  Eigen::MatrixXd k1(n, n), sk(n, n), f2(n, n), f3(n, n);
  for (Eigen::Index p = 0; p < n; ++p) {
    for (Eigen::Index q = 0; q < n; ++q) {
      const double d = s.omega[static_cast<std::size_t>(q)] - s.omega[static_cast<std::size_t>(p)];
      const double win23 = t23 * sinc(0.5 * t23 * d);
      k1(p, q) = jitter_kernel(jit[0], d);
      f2(p, q) = win23 * jitter_kernel(jit[1], d);
      f3(p, q) = win23 * jitter_kernel(jit[2], d);
      sk(p, q) = t14 * sinc(0.5 * t14 * d) * jitter_kernel(jit[3], d);
    }
  }

  // A = diag(a) K1 diag(a*), Hermitian.
  Eigen::MatrixXd a_re(n, n), a_im(n, n);
  for (Eigen::Index p = 0; p < n; ++p)
    for (Eigen::Index q = 0; q < n; ++q) {
      const Complex v = a[p] * k1(p, q) * std::conj(a[q]);
      a_re(p, q) = v.real();
      a_im(p, q) = v.imag();
    }
  const double s_a2 = a_re.cwiseProduct(f2).sum();
  const double s_a3 = a_re.cwiseProduct(f3).sum();

  const Eigen::MatrixXd c_re = f3 * a_re * f2;
  const Eigen::MatrixXd c_im = f3 * a_im * f2;

  s.m_direct = sk.cwiseProduct(s_a2 * f3 + s_a3 * f2);
  s.m_re = s.m_direct - sk.cwiseProduct(c_re + c_re.transpose());
  s.m_im = sk.cwiseProduct(c_im - c_im.transpose());
  s.m_abs = s.m_re.cwiseAbs() + s.m_im.cwiseAbs();
}

FourfoldEngine::~FourfoldEngine() = default;
FourfoldEngine::FourfoldEngine(FourfoldEngine&&) noexcept = default;
FourfoldEngine& FourfoldEngine::operator=(FourfoldEngine&&) noexcept = default;

double FourfoldEngine::probability(double tau) const {
  impl_->check(tau);
  const auto x = impl_->shifted(tau);
  const Complex v = impl_->form(x);
  const double scale = impl_->magnitude(x);
  if (std::abs(v.imag()) > 1e-9 * scale) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", std::abs(v.imag()) / scale);
    throw std::logic_error(std::string("four-photon sum is not real: residue ") + buf);
  }
  // Rounding can leave a dip of exactly zero slightly negative.
  return std::max(v.real(), 0.0) * impl_->dw4;
}

double FourfoldEngine::distinguishable(double tau) const {
  impl_->check(tau);
  return std::max(impl_->direct(impl_->shifted(tau)), 0.0) * impl_->dw4;
}

double FourfoldEngine::imaginary_residue(double tau) const {
  const auto x = impl_->shifted(tau);
  return std::abs(impl_->form(x).imag()) / impl_->magnitude(x);
}

long FourfoldEngine::active_nodes() const { return static_cast<long>(impl_->omega.size()); }
const InterferenceSetup& FourfoldEngine::setup() const { return impl_->setup; }

double fourfold_probability(const InterferenceSetup& setup, double tau) {
  return FourfoldEngine(setup).probability(tau);
}

// ---------------------------------------------------------------------------
// Time-domain oracle

namespace {

/// Trapezoid nodes and weights over [lo, hi] with spacing at most h.
struct Quadrature {
  std::vector<double> t;
  std::vector<double> w;
};

Quadrature trapezoid(double lo, double hi, double h) {
  Quadrature q;
  if (hi <= lo) {
    q.t = {lo};
    q.w = {1.0};
    return q;
  }
  const long n = std::max(2L, static_cast<long>(std::ceil((hi - lo) / h)) + 1);
  const double step = (hi - lo) / static_cast<double>(n - 1);
  q.t.resize(static_cast<std::size_t>(n));
  q.w.assign(static_cast<std::size_t>(n), step);
  for (long k = 0; k < n; ++k) q.t[static_cast<std::size_t>(k)] = lo + step * static_cast<double>(k);
  q.w.front() *= 0.5;
  q.w.back() *= 0.5;
  return q;
}

/// Nodes for a photon whose tag must land in [lo, hi] through a Gaussian
/// response; weights include the acceptance probability.
Quadrature window_nodes(double lo, double hi, double jitter, double h) {
  const double sig = fwhm_to_sigma(jitter);
  Quadrature q = trapezoid(lo - 6.0 * sig, hi + 6.0 * sig, h);
  for (std::size_t k = 0; k < q.t.size(); ++k)
    q.w[k] *= detection::window_acceptance(jitter, q.t[k], lo, hi);
  return q;
}

/// psi(t_r - s_c) = sum_m J_m e^{-i W_m (t_r - s_c)} dW as a matrix.
Eigen::MatrixXcd pair_amplitude(const std::vector<double>& omega, const Eigen::VectorXcd& j,
                                double dw, const std::vector<double>& t, const std::vector<double>& s) {
  const auto n = static_cast<Eigen::Index>(omega.size());
  Eigen::MatrixXcd et(static_cast<Eigen::Index>(t.size()), n);
  Eigen::MatrixXcd es(n, static_cast<Eigen::Index>(s.size()));
  for (Eigen::Index m = 0; m < n; ++m) {
    const double w = omega[static_cast<std::size_t>(m)];
    for (std::size_t r = 0; r < t.size(); ++r)
      et(static_cast<Eigen::Index>(r), m) = j[m] * dw * std::polar(1.0, -w * t[r]);
    for (std::size_t c = 0; c < s.size(); ++c)
      es(m, static_cast<Eigen::Index>(c)) = std::polar(1.0, w * s[c]);
  }
  return et * es;
}

Eigen::VectorXd as_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

double fourfold_probability_oracle(const InterferenceSetup& setup, double tau,
                                   const OracleOptions& options) {
  setup.validate();
  const FrequencyGrid& grid = setup.jsa_a.grid;
  const auto& ja = setup.jsa_a.values;
  const auto& jb = setup.jsa_b.values;

  std::vector<long> idx;
  for (long m = 0; m < grid.size(); ++m)
    if (ja[static_cast<std::size_t>(m)] != Complex{} || jb[static_cast<std::size_t>(m)] != Complex{})
      idx.push_back(m);
  if (idx.empty()) throw ValidationError("both JSAs are identically zero");
  if (static_cast<long>(idx.size()) > options.max_active_nodes)
    throw ValidationError("oracle is limited to " + std::to_string(options.max_active_nodes) +
                          " active frequency nodes, setup has " + std::to_string(idx.size()));

  const double tc = std::max(setup.tc_a > 0.0 ? setup.tc_a : coherence_time(setup.jsa_a),
                             setup.tc_b > 0.0 ? setup.tc_b : coherence_time(setup.jsa_b));
  const double t14 = setup.windows.tau_14, t23 = setup.windows.tau_23;
  // psi is periodic in t with period 2 pi / dW; every difference of
  // detection times must fit inside one period.
  const double needed = 2.0 * (std::abs(tau) + t23 + 5.0 * tc);
  if (kTwoPi / grid.step() <= needed) {
    const double step = kTwoPi / needed;
    auto required = static_cast<long>(std::ceil(2.0 * grid.span() / step)) + 1;
    if (required % 2 == 0) ++required;
    throw ResolutionError("time-domain period " + std::to_string(kTwoPi / grid.step()) +
                              " s is shorter than the required span " + std::to_string(needed) + " s",
                          required);
  }

  std::vector<double> omega;
  Eigen::VectorXcd a(static_cast<Eigen::Index>(idx.size())), b(static_cast<Eigen::Index>(idx.size()));
  double w_max = 0.0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    omega.push_back(grid.node(idx[k]));
    w_max = std::max(w_max, std::abs(omega.back()));
    a[static_cast<Eigen::Index>(k)] = ja[static_cast<std::size_t>(idx[k])];
    b[static_cast<Eigen::Index>(k)] = jb[static_cast<std::size_t>(idx[k])];
  }
  w_max = std::max(w_max, grid.step());

  const auto& jit = setup.detectors.jitter_fwhm;
  const double h_band = std::numbers::pi / (8.0 * w_max);
  auto step_for = [&](double window, double jitter) {
    double h = std::min(h_band, window / options.points_per_window);
    if (jitter > 0.0) h = std::min(h, 0.5 * fwhm_to_sigma(jitter));
    return h;
  };

  Quadrature q1;
  if (jit[0] == 0.0) {
    q1.t = {0.0};
    q1.w = {1.0};
  } else {
    const double sig = fwhm_to_sigma(jit[0]);
    q1 = trapezoid(-6.0 * sig, 6.0 * sig, std::min(h_band, 0.25 * sig));
    for (std::size_t k = 0; k < q1.t.size(); ++k)
      q1.w[k] *= std::exp(-0.5 * q1.t[k] * q1.t[k] / (sig * sig)) / (std::sqrt(kTwoPi) * sig);
  }
  const Quadrature q2 = window_nodes(-0.5 * t23, 0.5 * t23, jit[1], step_for(t23, jit[1]));
  const Quadrature q3 = window_nodes(-0.5 * t23, 0.5 * t23, jit[2], step_for(t23, jit[2]));
  const Quadrature q4 = window_nodes(tau - 0.5 * t14, tau + 0.5 * t14, jit[3], step_for(t14, jit[3]));

  const double dw = grid.step();
  const Eigen::MatrixXcd psi12 = pair_amplitude(omega, a, dw, q1.t, q2.t);
  const Eigen::MatrixXcd psi13 = pair_amplitude(omega, a, dw, q1.t, q3.t);
  const Eigen::MatrixXcd psi43 = pair_amplitude(omega, b, dw, q4.t, q3.t);
  const Eigen::MatrixXcd psi42 = pair_amplitude(omega, b, dw, q4.t, q2.t);
  const Eigen::VectorXd w1 = as_vector(q1.w), w2 = as_vector(q2.w), w3 = as_vector(q3.w),
                        w4 = as_vector(q4.w);

  // |A|^2 with A = psiA(1-2) psiB(4-3) - psiA(1-3) psiB(4-2).
  const double d12 = w1.dot(psi12.cwiseAbs2() * w2);
  const double d43 = w4.dot(psi43.cwiseAbs2() * w3);
  const double d13 = w1.dot(psi13.cwiseAbs2() * w3);
  const double d42 = w4.dot(psi42.cwiseAbs2() * w2);

  const Eigen::MatrixXcd x = psi12.transpose() * w1.cast<Complex>().asDiagonal() * psi13.conjugate();
  const Eigen::MatrixXcd y = psi42.adjoint() * w4.cast<Complex>().asDiagonal() * psi43;
  const Eigen::MatrixXd cross = x.cwiseProduct(y).real();

  return std::max(d12 * d43 + d13 * d42 - 2.0 * w2.dot(cross * w3), 0.0);
}

// ---------------------------------------------------------------------------

HomCurve hom_curve(const InterferenceSetup& setup, const std::vector<double>& delays, int threads) {
  const FourfoldEngine engine(setup);
  HomCurve c;
  c.delays = delays;
  c.values.resize(delays.size());
  c.distinguishable.resize(delays.size());
  parallel_for(delays.size(), threads, [&](std::size_t k) {
    c.values[k] = engine.probability(delays[k]);
    c.distinguishable[k] = engine.distinguishable(delays[k]);
  });
  c.dip = engine.probability(0.0);
  c.plateau = engine.distinguishable(0.0);
  const double tc = std::max(setup.tc_a > 0.0 ? setup.tc_a : coherence_time(setup.jsa_a),
                             setup.tc_b > 0.0 ? setup.tc_b : coherence_time(setup.jsa_b));
  c.reliable = setup.windows.tau_23 >= 4.0 * tc;
  return c;
}

double visibility(const HomCurve& curve) {
  if (!curve.reliable)
    throw UnreliablePlateauError(
        "tau_23 < 4 T_c: the beam-splitter window filters the photons and P(infinity) is not a "
        "plateau; visibility is not estimated in this regime");
  if (!(curve.plateau > 0.0)) throw ValidationError("plateau is zero; visibility undefined");
  return (curve.plateau - curve.dip) / curve.plateau;
}

// ---------------------------------------------------------------------------
// Identical-source maps

InterferenceSetup identical_source_setup(double tc, double tau14, double jitter,
                                         const VisibilityModel& model) {
  using spectral::FilterKind;
  if (!(tc > 0.0) || !(tau14 > 0.0) || !(jitter >= 0.0))
    throw ValidationError("identical-source setup needs tc > 0, tau14 > 0, jitter >= 0");
  if (!(model.bs_window_factor > 0.0)) throw ValidationError("bs_window_factor must be positive");
  const double tau23 = model.bs_window_factor * tc;
  const double t_max = std::max({tau14, tau23, tc});
  const double fwhm = spectral::filter_fwhm_for_coherence_time(model.filter, tc);

  std::optional<FrequencyGrid> grid;
  if (model.filter == FilterKind::Rect) {
    // Put the rectangle edges on cell boundaries so every node is fully in
    // or out and the discrete JSA is exactly a rectangle of width fwhm.
    const double max_step = std::min(fwhm / model.nodes_per_fwhm, spectral::max_step_for(t_max));
    auto k = static_cast<long>(std::ceil(fwhm / max_step));
    if (k % 2 == 0) ++k;
    const double step = fwhm / static_cast<double>(k);
    const long half = k + 2;
    grid.emplace(2 * half + 1, static_cast<double>(half) * step);
  } else {
    spectral::GridRequest req;
    req.widest_fwhm = fwhm;
    req.t_max = t_max;
    req.span_factor = 4.0;
    req.min_points = 3;
    req.nodes_per_fwhm = model.nodes_per_fwhm;
    grid = spectral::plan_grid(req);
  }
  const auto f = spectral::make_filter(model.filter, fwhm, *grid);
  const auto jsa = spectral::joint_spectral_amplitude(f, f);

  InterferenceSetup s{jsa, jsa, {}, {}, tc, tc};
  s.detectors.jitter_fwhm = {jitter, jitter, jitter, jitter};
  s.windows.tau_14 = tau14;
  s.windows.tau_23 = tau23;
  return s;
}

double identical_source_visibility(double tc, double tau14, double jitter, const VisibilityModel& model) {
  const InterferenceSetup s = identical_source_setup(tc, tau14, jitter, model);
  if (s.windows.tau_23 < 4.0 * tc)
    throw UnreliablePlateauError("bs_window_factor below 4 leaves no plateau");
  const FourfoldEngine engine(s);
  const double plateau = engine.distinguishable(0.0);
  if (!(plateau > 0.0)) throw ValidationError("plateau is zero; visibility undefined");
  return (plateau - engine.probability(0.0)) / plateau;
}

VisibilityMap visibility_map(const std::vector<double>& tc_values, const std::vector<double>& tau14_values,
                             double jitter, const VisibilityModel& model, int threads) {
  if (tc_values.empty() || tau14_values.empty()) throw ValidationError("visibility map axes are empty");
  VisibilityMap map{tc_values, tau14_values, std::vector<double>(tc_values.size() * tau14_values.size())};
  parallel_for(map.v.size(), threads, [&](std::size_t cell) {
    const std::size_t i = cell / tau14_values.size(), k = cell % tau14_values.size();
    map.v[cell] = identical_source_visibility(tc_values[i], tau14_values[k], jitter, model);
  });
  return map;
}

}  // namespace cwhom::interference
