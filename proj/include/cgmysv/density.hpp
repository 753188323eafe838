// Fourier inversion of characteristic functions to densities and CDFs, and
// Kolmogorov-Smirnov goodness of fit.
//
// Inversion uses a midpoint rule in frequency, u_j = (j + 1/2) du, evaluated
// on an x-grid of N points with dx du = 2 pi / N, so one FFT gives all
// abscissae. The midpoint rule aliases mass at distance N dx, so the x-window
// must cover the distribution; it is exact otherwise up to the frequency
// cutoff u_max = N du.
#pragma once

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <mutex>
#include <numbers>
#include <span>
#include <vector>

#include "cgmysv/cgmysv.hpp"
#include "cgmysv/cir.hpp"
#include "cgmysv/errors.hpp"

namespace cgmysv {

using CharacteristicFunction = std::function<cplx(double)>;

struct InversionGrid {
  double x_min = -1.0;
  double x_max = 1.0;
  std::size_t n_freq = 1u << 14;

  double width() const noexcept { return x_max - x_min; }
  double dx() const noexcept { return width() / static_cast<double>(n_freq); }
  double du() const noexcept { return 2.0 * std::numbers::pi / width(); }
  double u_max() const noexcept { return du() * static_cast<double>(n_freq); }
  double x(std::size_t k) const noexcept { return x_min + dx() * static_cast<double>(k); }

  void validate() const {
    detail::require(x_max > x_min, "InversionGrid: empty x-range");
    detail::require(n_freq >= 2 && (n_freq & (n_freq - 1)) == 0,
                    "InversionGrid: n_freq must be a power of two");
  }
};

/// Function tabulated on an increasing grid, linearly interpolated inside and
/// clamped to the end values outside.
struct Tabulated {
  std::vector<double> x;
  std::vector<double> y;
  bool cutoff_ok = true;     // |cf(u_max)| < 1e-8
  double rectification = 0;  // largest monotone correction applied (CDFs)

  double operator()(double at) const {
    if (at <= x.front()) return y.front();
    if (at >= x.back()) return y.back();
    const double h = x[1] - x[0];
    auto k = static_cast<std::size_t>((at - x.front()) / h);
    k = std::min(k, x.size() - 2);
    const double w = (at - x[k]) / h;
    return (1.0 - w) * y[k] + w * y[k + 1];
  }
};

namespace detail {

inline std::mutex& fftw_plan_mutex() {
  static std::mutex m;
  return m;
}

/// In-place forward complex DFT, out_k = sum_j in_j exp(-2 pi i j k / N).
class FftwForward {
 public:
  explicit FftwForward(std::size_t n) : n_(n) {
    buffer_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
    if (!buffer_) throw NumericalError("fftw_malloc failed");
    std::lock_guard lock(fftw_plan_mutex());
    plan_ = fftw_plan_dft_1d(static_cast<int>(n), buffer_, buffer_, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  FftwForward(const FftwForward&) = delete;
  FftwForward& operator=(const FftwForward&) = delete;
  ~FftwForward() {
    {
      std::lock_guard lock(fftw_plan_mutex());
      fftw_destroy_plan(plan_);
    }
    fftw_free(buffer_);
  }

  std::span<cplx> data() noexcept { return {reinterpret_cast<cplx*>(buffer_), n_}; }
  void execute() noexcept { fftw_execute(plan_); }

 private:
  std::size_t n_;
  fftw_complex* buffer_ = nullptr;
  fftw_plan plan_ = nullptr;
};

inline std::size_t next_pow2(double x) {
  std::size_t n = 1;
  while (static_cast<double>(n) < x) n <<= 1;
  return n;
}

}  // namespace detail

struct GridHints {
  double sd_multiple = 12.0;
  double tail_rate_left = 0.0;   // exponential tail decay rates if known
  double tail_rate_right = 0.0;
  double tail_decades = 20.0;    // e-folds of tail kept when a rate is given
  double cf_cutoff = 1e-8;
  std::size_t min_freq = 1u << 14;
  std::size_t max_freq = 1u << 22;
};

/// Mean and variance from central differences of log cf at 0.
inline std::pair<double, double> cf_moments(const CharacteristicFunction& cf, double h = 1e-3) {
  for (int pass = 0; pass < 2; ++pass) {
    const cplx lp = std::log(cf(h));
    const cplx lm = std::log(cf(-h));
    const double mean = (lp - lm).imag() / (2.0 * h);
    const double var = -(lp + lm).real() / (h * h);
    if (pass == 1 || !(var > 0.0)) return {mean, var};
    h = 1e-3 * std::sqrt(var);
  }
  return {0.0, 0.0};
}

/// Chooses an x-window from moments and tail rates, and a frequency count so
/// that |cf(u_max)| falls below the cutoff.
inline InversionGrid make_inversion_grid(const CharacteristicFunction& cf, const GridHints& hints = {}) {
  const auto [mean, var] = cf_moments(cf);
  if (!(var > 0.0) || !std::isfinite(var))
    throw NumericalError("make_inversion_grid: non-positive variance from cf curvature");
  const double sd = std::sqrt(var);
  double left = hints.sd_multiple * sd;
  double right = hints.sd_multiple * sd;
  if (hints.tail_rate_left > 0.0) left = std::max(left, hints.tail_decades / hints.tail_rate_left);
  if (hints.tail_rate_right > 0.0) right = std::max(right, hints.tail_decades / hints.tail_rate_right);

  double u = 1.0 / sd;
  while (u < 1e12) {
    if (std::abs(cf(u)) < hints.cf_cutoff && std::abs(cf(1.5 * u)) < hints.cf_cutoff) break;
    u *= 1.5;
  }
  InversionGrid g;
  g.x_min = mean - left;
  g.x_max = mean + right;
  const double needed = u * g.width() / (2.0 * std::numbers::pi);
  g.n_freq = std::clamp(detail::next_pow2(needed), hints.min_freq, hints.max_freq);
  return g;
}

namespace detail {

enum class InversionKind { Density, Distribution };

inline Tabulated invert(const CharacteristicFunction& cf, const InversionGrid& grid,
                        InversionKind kind) {
  grid.validate();
  const std::size_t n = grid.n_freq;
  const double du = grid.du();
  FftwForward fft(n);
  auto buf = fft.data();
  for (std::size_t j = 0; j < n; ++j) {
    const double u = (static_cast<double>(j) + 0.5) * du;
    cplx a = cf(u) * std::exp(-kI * u * grid.x_min);
    if (kind == InversionKind::Distribution) a /= u;
    buf[j] = a;
  }
  fft.execute();

  Tabulated out;
  out.cutoff_ok = std::abs(cf(grid.u_max())) < 1e-8;
  out.x.resize(n);
  out.y.resize(n);
  const double pi = std::numbers::pi;
  for (std::size_t k = 0; k < n; ++k) {
    const cplx s = std::exp(-kI * (pi * static_cast<double>(k) / static_cast<double>(n))) * buf[k];
    out.x[k] = grid.x(k);
    out.y[k] = kind == InversionKind::Density ? du / pi * s.real() : 0.5 - du / pi * s.imag();
  }
  return out;
}

}  // namespace detail

/// f(x) = (1/pi) int_0^inf Re(exp(-iux) cf(u)) du on the grid abscissae.
inline Tabulated pdf_from_cf(const CharacteristicFunction& cf, const InversionGrid& grid) {
  return detail::invert(cf, grid, detail::InversionKind::Density);
}

/// Gil-Pelaez F(x) = 1/2 - (1/pi) int_0^inf Im(exp(-iux) cf(u)) / u du, then
/// clamped to [0,1] and made non-decreasing by a running maximum.
inline Tabulated cdf_from_cf(const CharacteristicFunction& cf, const InversionGrid& grid) {
  auto t = detail::invert(cf, grid, detail::InversionKind::Distribution);
  double running = 0.0;
  double worst = 0.0;
  for (auto& y : t.y) {
    const double raw = y;
    running = std::max(running, std::clamp(raw, 0.0, 1.0));
    worst = std::max(worst, std::abs(running - raw));
    y = running;
  }
  t.rectification = worst;
  return t;
}

/// Asymptotic Kolmogorov survival function P(sqrt(n) D_n > x).
inline double kolmogorov_pvalue(double x) {
  if (x <= 0.0) return 1.0;
  const double pi = std::numbers::pi;
  if (x < 0.5) {
    // Jacobi theta form of the CDF, fast for small x.
    double cdf = 0.0;
    for (int k = 1; k < 50; ++k) {
      const double term = std::exp(-(2.0 * k - 1) * (2.0 * k - 1) * pi * pi / (8.0 * x * x));
      cdf += term;
      if (term < 1e-16) break;
    }
    return 1.0 - std::sqrt(2.0 * pi) / x * cdf;
  }
  double sum = 0.0;
  for (int k = 1; k < 200; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-10) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// One-sample KS test of sorted samples against a CDF.
template <typename Cdf>
KsResult ks_test(std::span<const double> sorted, const Cdf& cdf) {
  detail::require(sorted.size() >= 100, "ks_test: at least 100 samples required");
  detail::require(std::is_sorted(sorted.begin(), sorted.end()), "ks_test: samples must be sorted");
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return {d, kolmogorov_pvalue(std::sqrt(n) * d)};
}

/// Two-sample KS statistic and asymptotic p-value.
inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = na * nb / (na + nb);
  return {d, kolmogorov_pvalue(std::sqrt(ne) * d)};
}

/// Grid hints for L_t: exponential tails of rate lambda_-/lambda_+ from the
/// CGMY part, and rate c/|rho| from the rho v_t part.
inline GridHints cgmysv_grid_hints(const CgmysvParams& p, double t) {
  GridHints h;
  h.tail_rate_left = p.lambda_minus;
  h.tail_rate_right = p.lambda_plus;
  if (p.rho != 0.0) {
    const double c = 2.0 * p.kappa / ((1.0 - std::exp(-p.kappa * t)) * p.zeta * p.zeta);
    double& side = p.rho > 0.0 ? h.tail_rate_right : h.tail_rate_left;
    side = std::min(side, c / std::abs(p.rho));
  }
  return h;
}

inline CharacteristicFunction cgmysv_cf_at(const CgmysvParams& p, double t) {
  return [p, t](double u) { return cgmysv_cf(p, u, t); };
}

inline Tabulated cgmysv_cdf(const CgmysvParams& p, double t) {
  const auto cf = cgmysv_cf_at(p, t);
  return cdf_from_cf(cf, make_inversion_grid(cf, cgmysv_grid_hints(p, t)));
}

inline Tabulated cgmysv_pdf(const CgmysvParams& p, double t) {
  const auto cf = cgmysv_cf_at(p, t);
  return pdf_from_cf(cf, make_inversion_grid(cf, cgmysv_grid_hints(p, t)));
}

}  // namespace cgmysv
