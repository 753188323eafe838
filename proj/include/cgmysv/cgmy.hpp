// CGMY distribution and process: characteristic functions, Levy symbols,
// standardization and the truncated Rosinski series sampler.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "cgmysv/cir.hpp"
#include "cgmysv/errors.hpp"
#include "cgmysv/randkit.hpp"

namespace cgmysv {

struct CgmyParams {
  double alpha = 0.5;
  double c_scale = 1.0;
  double lambda_plus = 1.0;
  double lambda_minus = 1.0;
  double mu = 0.0;

  void validate() const {
    detail::require(alpha > 0.0 && alpha < 2.0 && alpha != 1.0,
                    "CgmyParams: alpha must lie in (0,2) and differ from 1");
    detail::require(c_scale > 0.0 && lambda_plus > 0.0 && lambda_minus > 0.0,
                    "CgmyParams: C, lambda_plus, lambda_minus must be positive");
  }

  /// Drift b = -C Gamma(1-alpha) (lambda_+^{alpha-1} - lambda_-^{alpha-1})
  /// that centres the series sum.
  double series_drift() const {
    return -c_scale * std::tgamma(1.0 - alpha) *
           (std::pow(lambda_plus, alpha - 1.0) - std::pow(lambda_minus, alpha - 1.0));
  }
};

/// Zero mean, unit variance CGMY.
struct StdCgmyParams {
  double alpha = 0.5;
  double lambda_plus = 1.0;
  double lambda_minus = 1.0;

  void validate() const { as_cgmy().validate(); }

  double c_scale() const {
    return 1.0 / (std::tgamma(2.0 - alpha) *
                  (std::pow(lambda_plus, alpha - 2.0) + std::pow(lambda_minus, alpha - 2.0)));
  }

  CgmyParams as_cgmy() const { return {alpha, c_scale(), lambda_plus, lambda_minus, 0.0}; }
};

namespace detail {

inline void require_strip(double lambda_plus, double lambda_minus, cplx u) {
  if (!(u.imag() > -lambda_plus && u.imag() < lambda_minus))
    throw NumericalError("CGMY characteristic function: Im(u) outside (-lambda_+, lambda_-)");
}

/// (lambda_+ - iu)^a - lambda_+^a + (lambda_- + iu)^a - lambda_-^a
inline cplx tempered_bracket(double alpha, double lp, double lm, cplx u) {
  return std::pow(lp - kI * u, alpha) - std::pow(lp, alpha) + std::pow(lm + kI * u, alpha) -
         std::pow(lm, alpha);
}

}  // namespace detail

inline cplx levy_symbol(const CgmyParams& p, cplx u) {
  detail::require_strip(p.lambda_plus, p.lambda_minus, u);
  const double drift = p.mu + p.series_drift();
  return drift * kI * u +
         p.c_scale * std::tgamma(-p.alpha) *
             detail::tempered_bracket(p.alpha, p.lambda_plus, p.lambda_minus, u);
}

inline cplx cgmy_cf(const CgmyParams& p, cplx u) { return std::exp(levy_symbol(p, u)); }

/// Closed-form standard CGMY symbol (no gamma functions).
inline cplx levy_symbol(const StdCgmyParams& p, cplx u) {
  detail::require_strip(p.lambda_plus, p.lambda_minus, u);
  const double a = p.alpha;
  const double s2 = std::pow(p.lambda_plus, a - 2.0) + std::pow(p.lambda_minus, a - 2.0);
  const double s1 = std::pow(p.lambda_plus, a - 1.0) - std::pow(p.lambda_minus, a - 1.0);
  return s1 / ((a - 1.0) * s2) * kI * u +
         detail::tempered_bracket(a, p.lambda_plus, p.lambda_minus, u) / (a * (a - 1.0) * s2);
}

inline cplx std_cgmy_cf(const StdCgmyParams& p, cplx u) { return std::exp(levy_symbol(p, u)); }

/// Per-path ingredients of the series representation.
struct SeriesDraws {
  std::vector<double> gamma;   // Poisson arrivals Gamma_j
  std::vector<double> e;       // E_j
  std::vector<double> u;       // U_j
  std::vector<double> tau;     // arrival times on (0, horizon)
  std::vector<std::uint8_t> positive;  // V_j = lambda_+ (jump up) if set

  std::size_t size() const noexcept { return gamma.size(); }
};

/// Draws J series terms from the five series substreams of one stream id.
inline SeriesDraws draw_series(std::uint64_t master_seed, std::uint64_t stream_id, int terms,
                               double horizon) {
  detail::require(terms >= 1, "series: truncation J must be >= 1");
  VariateStream su({master_seed, stream_id, Substream::SeriesU});
  VariateStream sup({master_seed, stream_id, Substream::SeriesUPrime});
  VariateStream se({master_seed, stream_id, Substream::SeriesE});
  VariateStream sep({master_seed, stream_id, Substream::SeriesEPrime});
  VariateStream st({master_seed, stream_id, Substream::SeriesTau});

  SeriesDraws d;
  const auto n = static_cast<std::size_t>(terms);
  d.gamma.resize(n);
  d.e.resize(n);
  d.u.resize(n);
  d.tau.resize(n);
  d.positive.resize(n);
  double arrival = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    d.u[j] = su.uniform();
    d.positive[j] = sup.uniform() <= 0.5 ? 1 : 0;
    d.e[j] = se.exponential();
    arrival += sep.exponential();
    d.gamma[j] = arrival;
    d.tau[j] = horizon * st.uniform();
  }
  return d;
}

/// Unsigned jump (alpha Gamma / (2 c T))^{-1/alpha} ^ E U^{1/alpha} / |V|.
/// A zero scale contributes no jump.
inline double jump_scale_term(double gamma_j, double e_j, double u_j, double abs_v, double scale,
                              double alpha, double horizon) {
  if (scale <= 0.0) return 0.0;
  const double inv_alpha = 1.0 / alpha;
  const double stable = std::pow(alpha * gamma_j / (2.0 * scale * horizon), -inv_alpha);
  const double tempered = e_j * std::pow(u_j, inv_alpha) / abs_v;
  return std::min(stable, tempered);
}

/// Signed jump j of a series with scale c and horizon T.
inline double signed_jump(const SeriesDraws& d, std::size_t j, const CgmyParams& p, double scale,
                          double horizon) {
  const bool up = d.positive[j] != 0;
  const double mag = jump_scale_term(d.gamma[j], d.e[j], d.u[j],
                                     up ? p.lambda_plus : p.lambda_minus, scale, p.alpha, horizon);
  return up ? mag : -mag;
}

/// One CGMY(alpha, C, lambda_+, lambda_-, 0) variate from J series terms.
inline double sample_cgmy_variable(const CgmyParams& p, int terms, std::uint64_t master_seed,
                                   std::uint64_t stream_id) {
  p.validate();
  const auto d = draw_series(master_seed, stream_id, terms, 1.0);
  double x = p.series_drift();
  for (std::size_t j = 0; j < d.size(); ++j) x += signed_jump(d, j, p, p.c_scale, 1.0);
  return x;
}

/// CGMY process on [0, T] evaluated at the given times (each in [0, T]).
inline std::vector<double> sample_cgmy_path(const CgmyParams& p, double horizon,
                                            std::span<const double> times, int terms,
                                            std::uint64_t master_seed, std::uint64_t stream_id) {
  p.validate();
  detail::require(horizon > 0.0, "sample_cgmy_path: horizon must be positive");
  const auto d = draw_series(master_seed, stream_id, terms, horizon);
  const double b = p.series_drift();
  std::vector<double> x(times.size());
  for (std::size_t k = 0; k < times.size(); ++k) x[k] = times[k] * b;
  for (std::size_t j = 0; j < d.size(); ++j) {
    const double jump = signed_jump(d, j, p, p.c_scale, horizon);
    for (std::size_t k = 0; k < times.size(); ++k)
      if (d.tau[j] <= times[k]) x[k] += jump;
  }
  return x;
}

/// Uniform-grid variant: returns X at t_m = m T / M, m = 0..M.
inline void fill_cgmy_grid_path(const CgmyParams& p, double horizon, int steps, const SeriesDraws& d,
                                std::span<double> out) {
  const double dt = horizon / steps;
  const double b = p.series_drift();
  std::vector<double> inc(static_cast<std::size_t>(steps), b * dt);
  for (std::size_t j = 0; j < d.size(); ++j) {
    auto k = static_cast<int>(std::ceil(d.tau[j] / dt)) - 1;
    k = std::clamp(k, 0, steps - 1);
    inc[k] += signed_jump(d, j, p, p.c_scale, horizon);
  }
  out[0] = 0.0;
  for (int m = 1; m <= steps; ++m) out[m] = out[m - 1] + inc[m - 1];
}

}  // namespace cgmysv
