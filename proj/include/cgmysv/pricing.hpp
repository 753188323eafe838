// Risk-neutral asset model S_t = S0 exp((r-q)t + L_t) / E[exp(L_t)] and the
// option pricers built on it: Carr-Madan FFT for Europeans, Monte Carlo for
// European/Asian/Barrier payoffs and Longstaff-Schwartz for Americans.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cgmysv/cgmy.hpp"
#include "cgmysv/cgmysv.hpp"
#include "cgmysv/density.hpp"
#include "cgmysv/errors.hpp"
#include "cgmysv/matrix.hpp"

namespace cgmysv {

enum class DayCount { Trading252, Calendar365 };

inline double days_per_year(DayCount dc) noexcept {
  return dc == DayCount::Trading252 ? 252.0 : 365.0;
}

inline double year_fraction(double days, DayCount dc) noexcept { return days / days_per_year(dc); }

struct MarketEnv {
  double s0 = 100.0;
  double r = 0.0;
  double q = 0.0;

  void validate() const { detail::require(s0 > 0.0, "MarketEnv: s0 must be positive"); }
};

enum class OptionRight { Call, Put };
enum class ExerciseStyle { European, American, AsianArithmetic, BarrierDownOut, BarrierUpOut };

inline bool is_barrier(ExerciseStyle s) noexcept {
  return s == ExerciseStyle::BarrierDownOut || s == ExerciseStyle::BarrierUpOut;
}

struct OptionSpec {
  double strike = 0.0;
  double maturity = 0.0;  // years
  OptionRight right = OptionRight::Call;
  ExerciseStyle style = ExerciseStyle::European;
  std::optional<double> barrier;

  void validate(const MarketEnv& env) const {
    detail::require(strike > 0.0, "OptionSpec: strike must be positive");
    detail::require(maturity > 0.0, "OptionSpec: maturity must be positive");
    detail::require(barrier.has_value() == is_barrier(style),
                    "OptionSpec: barrier level required exactly for barrier styles");
    if (barrier) {
      detail::require(*barrier > 0.0, "OptionSpec: barrier must be positive");
      if (style == ExerciseStyle::BarrierDownOut)
        detail::require(*barrier < env.s0, "OptionSpec: down-and-out barrier must be below s0");
      else
        detail::require(*barrier > env.s0, "OptionSpec: up-and-out barrier must be above s0");
    }
  }
};

inline double payoff(OptionRight right, double s, double strike) noexcept {
  return right == OptionRight::Call ? std::max(s - strike, 0.0) : std::max(strike - s, 0.0);
}

inline constexpr double kZ975 = 1.959964;

struct PricingResult {
  double price = 0.0;
  double std_error = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t n_paths = 0;

  static PricingResult exact(double price) { return {price, 0.0, price, price, 0}; }

  static PricingResult from_samples(std::span<const double> x) {
    const double n = static_cast<double>(x.size());
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    const double se = x.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
    return {mean, se, mean - kZ975 * se, mean + kZ975 * se, x.size()};
  }
};

/// Simulated asset prices; variance is empty for models without a variance
/// factor.
struct AssetPaths {
  std::vector<double> times;
  Matrix spot;
  Matrix variance;

  double horizon() const { return times.back(); }
  std::size_t paths() const noexcept { return spot.rows(); }
};

inline AssetPaths spot_from_pathset(const PathSet& ps, const CgmysvParams& p, const MarketEnv& env) {
  env.validate();
  detail::require(p.lambda_plus > 1.0, "spot paths: lambda_plus must exceed 1");
  std::vector<double> log_corr(ps.times.size());
  for (std::size_t k = 0; k < ps.times.size(); ++k)
    log_corr[k] = cgmysv_log_mgf_one(p, ps.times[k]);

  AssetPaths out{ps.times, Matrix(ps.paths(), ps.times.size()), ps.v};
  for (std::size_t n = 0; n < ps.paths(); ++n)
    for (std::size_t k = 0; k < ps.times.size(); ++k)
      out.spot(n, k) =
          env.s0 * std::exp((env.r - env.q) * ps.times[k] + ps.L(n, k) - log_corr[k]);
  return out;
}

inline AssetPaths spot_paths(const CgmysvParams& p, const MarketEnv& env, double horizon, int steps,
                             int paths, int terms, StreamSeeds seeds, unsigned threads = 1) {
  detail::require(p.lambda_plus > 1.0, "spot paths: lambda_plus must exceed 1");
  const auto ps = generate_paths(p, horizon, steps, paths, terms, seeds, {false, threads});
  return spot_from_pathset(ps, p, env);
}

/// CGMY benchmark: S_t = S0 exp((r-q)t + X_t) / E[exp(X_t)] with X a CGMY
/// process (mu = 0) sampled by the series representation.
inline AssetPaths cgmy_spot_paths(CgmyParams p, const MarketEnv& env, double horizon, int steps,
                                  int paths, int terms, std::uint64_t seed, unsigned threads = 1) {
  p.mu = 0.0;
  p.validate();
  env.validate();
  detail::require(p.lambda_plus > 1.0, "spot paths: lambda_plus must exceed 1");
  const double psi_one = levy_symbol(p, cplx{0.0, -1.0}).real();
  AssetPaths out{uniform_grid(horizon, steps), Matrix(paths, steps + 1), Matrix{}};
  parallel_for(static_cast<std::size_t>(paths), threads, [&](std::size_t n) {
    const auto draws = draw_series(seed, n, terms, horizon);
    auto row = out.spot.row(n);
    fill_cgmy_grid_path(p, horizon, steps, draws, row);
    for (int k = 0; k <= steps; ++k) {
      const double t = out.times[k];
      row[k] = env.s0 * std::exp((env.r - env.q) * t + row[k] - t * psi_one);
    }
  });
  return out;
}

// ---------------------------------------------------------------------------
// Carr-Madan FFT

struct FftConfig {
  int n = 4096;          // log-strike nodes (minimum when adaptive)
  double eta = 0.25;     // frequency spacing (maximum when adaptive)
  double damping = 1.25;
  bool auto_damping = true;  // shrink damping into the strip when needed
  // Refine eta until the aliased log-strike window is wide enough for the
  // damping used, and grow n until the integrand tail is below tolerance.
  bool adaptive_grid = true;
  double tolerance = 1e-8;  // relative to the spot
  int max_n = 1 << 20;
};

/// Characteristic function of X_T = ln(S_T / F_T), normalised so E[e^X] = 1.
using LogReturnCf = std::function<cplx(cplx)>;

inline LogReturnCf cgmysv_log_return_cf(const CgmysvParams& p, double maturity) {
  const double m = cgmysv_log_mgf_one(p, maturity);
  return [p, maturity, m](cplx u) { return cgmysv_cf(p, u, maturity) * std::exp(-kI * u * m); };
}

inline LogReturnCf cgmy_log_return_cf(CgmyParams p, double maturity) {
  p.mu = 0.0;
  const double psi_one = levy_symbol(p, cplx{0.0, -1.0}).real();
  return [p, maturity, psi_one](cplx u) {
    return std::exp(maturity * (levy_symbol(p, u) - kI * u * psi_one));
  };
}

struct CallGrid {
  std::vector<double> log_strike;
  std::vector<double> call;
  double damping = 0.0;

  /// Four-point Lagrange interpolation in log-strike.
  double at_strike(double strike) const {
    const double k = std::log(strike);
    const double h = log_strike[1] - log_strike[0];
    const double pos = (k - log_strike.front()) / h;
    auto i = static_cast<long>(std::floor(pos)) - 1;
    if (i < 0 || i + 3 >= static_cast<long>(log_strike.size()))
      throw ValidationError("fft_european: strike outside the FFT log-strike grid");
    const double s = pos - static_cast<double>(i);  // in [1,2)
    const double c0 = call[i], c1 = call[i + 1], c2 = call[i + 2], c3 = call[i + 3];
    return c0 * (-(s - 1) * (s - 2) * (s - 3) / 6.0) + c1 * (s * (s - 2) * (s - 3) / 2.0) +
           c2 * (-s * (s - 1) * (s - 3) / 2.0) + c3 * (s * (s - 1) * (s - 2) / 6.0);
  }
};

/// Picks the damping constant: the configured value if E[e^{(1+a)X}] is
/// finite, otherwise (when allowed) half the distance to the strip edge.
inline double choose_damping(const LogReturnCf& cf, const FftConfig& cfg, double strip_upper) {
  auto ok = [&](double a) {
    if (a + 1.0 >= strip_upper) return false;
    try {
      const cplx v = cf(cplx{0.0, -(1.0 + a)});
      return std::isfinite(v.real()) && v.real() > 0.0;
    } catch (const NumericalError&) {
      return false;
    }
  };
  if (ok(cfg.damping)) return cfg.damping;
  if (!cfg.auto_damping)
    throw NumericalError("fft_european: damping constant outside the characteristic function strip");
  double a = std::min(cfg.damping, 0.5 * (strip_upper - 1.0));
  for (int i = 0; i < 20 && a > 1e-3; ++i, a *= 0.5)
    if (ok(a)) return a;
  throw NumericalError("fft_european: no admissible damping constant");
}

/// Call prices on a log-strike grid centred at the forward. strip_upper is the
/// largest p with E[S_T^p] finite known a priori (lambda_+ for CGMY models).
inline CallGrid carr_madan_calls(const LogReturnCf& cf, const MarketEnv& env, double maturity,
                                 const FftConfig& cfg, double strip_upper) {
  env.validate();
  detail::require(maturity > 0.0, "fft_european: maturity must be positive");
  detail::require(cfg.n >= 16 && (cfg.n & (cfg.n - 1)) == 0, "fft_european: n must be a power of two");
  const double a = choose_damping(cf, cfg, strip_upper);
  const double log_fwd = std::log(env.s0) + (env.r - env.q) * maturity;
  const double disc = std::exp(-env.r * maturity);
  std::size_t n = static_cast<std::size_t>(cfg.n);
  double eta = cfg.eta;
  if (cfg.adaptive_grid) {
    // Aliasing error ~ s0 exp(-a W / 2) for a log-strike window W = 2 pi / eta.
    const double log_tol = std::log(1.0 / cfg.tolerance);
    eta = std::min(eta, std::numbers::pi * a / log_tol);
    // Truncation error ~ s0 |cf(u - (1+a)i)| / u beyond u_max.
    auto tail = [&](double u) { return std::abs(cf(cplx{u, -(a + 1.0)})) / u; };
    double u = 16.0;
    while (u * eta < static_cast<double>(cfg.max_n) && (tail(u) > cfg.tolerance || tail(2.0 * u) > cfg.tolerance))
      u *= 1.5;
    n = std::max(n, detail::next_pow2(u / eta));
    n = std::min(n, static_cast<std::size_t>(cfg.max_n));
  }
  const double lambda = 2.0 * std::numbers::pi / (static_cast<double>(n) * eta);
  const double k0 = log_fwd - 0.5 * lambda * static_cast<double>(n);

  detail::FftwForward fft(n);
  auto buf = fft.data();
  for (std::size_t j = 0; j < n; ++j) {
    const double v = eta * static_cast<double>(j);
    const cplx shifted{v, -(a + 1.0)};
    const cplx cf_log_s = std::exp(kI * shifted * log_fwd) * cf(shifted);
    const cplx psi = disc * cf_log_s / cplx{a * a + a - v * v, (2.0 * a + 1.0) * v};
    double w = (j % 2 == 0) ? 2.0 / 3.0 : 4.0 / 3.0;
    if (j == 0) w = 1.0 / 3.0;
    buf[j] = std::exp(-kI * v * k0) * psi * eta * w;
  }
  fft.execute();

  CallGrid out;
  out.damping = a;
  out.log_strike.resize(n);
  out.call.resize(n);
  for (std::size_t u = 0; u < n; ++u) {
    const double k = k0 + lambda * static_cast<double>(u);
    out.log_strike[u] = k;
    out.call[u] = std::exp(-a * k) / std::numbers::pi * buf[u].real();
  }
  return out;
}

inline std::vector<double> prices_from_call_grid(const CallGrid& grid, const MarketEnv& env,
                                                 OptionRight right, double maturity,
                                                 std::span<const double> strikes) {
  std::vector<double> out;
  out.reserve(strikes.size());
  for (double k : strikes) {
    detail::require(k > 0.0, "fft_european: strikes must be positive");
    const double c = grid.at_strike(k);
    out.push_back(right == OptionRight::Call
                      ? c
                      : c - env.s0 * std::exp(-env.q * maturity) + k * std::exp(-env.r * maturity));
  }
  return out;
}

/// European prices under CGMYSV on the requested strikes; puts via parity.
inline std::vector<double> fft_european(const CgmysvParams& p, const MarketEnv& env, OptionRight right,
                                        double maturity, std::span<const double> strikes,
                                        const FftConfig& cfg = {}) {
  p.validate();
  detail::require(p.lambda_plus > 1.0, "fft_european: lambda_plus must exceed 1");
  const auto grid = carr_madan_calls(cgmysv_log_return_cf(p, maturity), env, maturity, cfg, p.lambda_plus);
  return prices_from_call_grid(grid, env, right, maturity, strikes);
}

inline std::vector<double> fft_european(const CgmyParams& p, const MarketEnv& env, OptionRight right,
                                        double maturity, std::span<const double> strikes,
                                        const FftConfig& cfg = {}) {
  p.validate();
  detail::require(p.lambda_plus > 1.0, "fft_european: lambda_plus must exceed 1");
  const auto grid = carr_madan_calls(cgmy_log_return_cf(p, maturity), env, maturity, cfg, p.lambda_plus);
  return prices_from_call_grid(grid, env, right, maturity, strikes);
}

// ---------------------------------------------------------------------------
// Monte Carlo pricers

namespace detail {

inline void require_horizon(const AssetPaths& paths, const OptionSpec& spec) {
  require(paths.paths() > 0 && paths.times.size() >= 2, "pricer: empty path set");
  const double t = paths.horizon();
  require(std::abs(t - spec.maturity) <= 1e-9 * std::max(1.0, t),
          "pricer: option maturity does not match the path horizon (grid mismatch)");
}

}  // namespace detail

inline PricingResult mc_european(const AssetPaths& paths, const OptionSpec& spec, const MarketEnv& env) {
  detail::require(spec.style == ExerciseStyle::European, "mc_european: style must be european");
  detail::require_horizon(paths, spec);
  const double disc = std::exp(-env.r * spec.maturity);
  const std::size_t last = paths.times.size() - 1;
  std::vector<double> x(paths.paths());
  for (std::size_t n = 0; n < x.size(); ++n) x[n] = disc * payoff(spec.right, paths.spot(n, last), spec.strike);
  return PricingResult::from_samples(x);
}

inline PricingResult mc_asian(const AssetPaths& paths, const OptionSpec& spec, const MarketEnv& env) {
  detail::require(spec.style == ExerciseStyle::AsianArithmetic, "mc_asian: style must be asian_arithmetic");
  detail::require_horizon(paths, spec);
  const double disc = std::exp(-env.r * spec.maturity);
  const std::size_t cols = paths.times.size();
  std::vector<double> x(paths.paths());
  for (std::size_t n = 0; n < x.size(); ++n) {
    double avg = 0.0;
    for (std::size_t k = 1; k < cols; ++k) avg += paths.spot(n, k);
    avg /= static_cast<double>(cols - 1);
    x[n] = disc * payoff(spec.right, avg, spec.strike);
  }
  return PricingResult::from_samples(x);
}

/// Knock-out monitored at t_1..t_M.
inline PricingResult mc_barrier(const AssetPaths& paths, const OptionSpec& spec, const MarketEnv& env) {
  detail::require(is_barrier(spec.style), "mc_barrier: style must be a barrier style");
  detail::require(spec.barrier.has_value(), "mc_barrier: barrier level missing");
  detail::require_horizon(paths, spec);
  const double disc = std::exp(-env.r * spec.maturity);
  const double level = *spec.barrier;
  const bool down = spec.style == ExerciseStyle::BarrierDownOut;
  const std::size_t cols = paths.times.size();
  std::vector<double> x(paths.paths());
  for (std::size_t n = 0; n < x.size(); ++n) {
    bool knocked = false;
    for (std::size_t k = 1; k < cols && !knocked; ++k) {
      const double s = paths.spot(n, k);
      knocked = down ? s <= level : s >= level;
    }
    x[n] = knocked ? 0.0 : disc * payoff(spec.right, paths.spot(n, cols - 1), spec.strike);
  }
  return PricingResult::from_samples(x);
}

enum class VolBasis { Sqrt, Variance };

struct LsmOptions {
  VolBasis vol_basis = VolBasis::Sqrt;
};

struct LsmResult : PricingResult {
  int reduced_basis_steps = 0;  // dates where {1,S,S^2} replaced the full basis
  double exercised_fraction = 0.0;
};

/// Longstaff-Schwartz on every grid date t_1..t_{M-1}, regressing discounted
/// continuation values of in-the-money paths on {1, S, S^2, s, s^2, sS}
/// with s = sqrt(v) (or v). S is scaled by the strike for conditioning.
inline LsmResult lsm_american(const AssetPaths& paths, const OptionSpec& spec, const MarketEnv& env,
                              const LsmOptions& opts = {}) {
  detail::require(spec.style == ExerciseStyle::American, "lsm_american: style must be american");
  detail::require_horizon(paths, spec);
  const std::size_t n_paths = paths.paths();
  const std::size_t steps = paths.times.size() - 1;
  const bool have_vol = !paths.variance.empty();
  const double dt = paths.horizon() / static_cast<double>(steps);
  const double step_disc = std::exp(-env.r * dt);

  std::vector<double> cash(n_paths);
  std::vector<char> exercised(n_paths, 0);
  for (std::size_t n = 0; n < n_paths; ++n) cash[n] = payoff(spec.right, paths.spot(n, steps), spec.strike);

  LsmResult res;
  std::vector<std::size_t> itm;
  for (std::size_t m = steps - 1; m >= 1; --m) {
    for (auto& c : cash) c *= step_disc;
    itm.clear();
    for (std::size_t n = 0; n < n_paths; ++n)
      if (payoff(spec.right, paths.spot(n, m), spec.strike) > 0.0) itm.push_back(n);

    auto fit = [&](int basis) -> std::optional<Eigen::VectorXd> {
      if (itm.size() < static_cast<std::size_t>(basis) + 1) return std::nullopt;
      Eigen::MatrixXd x(static_cast<Eigen::Index>(itm.size()), basis);
      Eigen::VectorXd y(static_cast<Eigen::Index>(itm.size()));
      for (std::size_t i = 0; i < itm.size(); ++i) {
        const std::size_t n = itm[i];
        const double s = paths.spot(n, m) / spec.strike;
        const auto r = static_cast<Eigen::Index>(i);
        x(r, 0) = 1.0;
        x(r, 1) = s;
        x(r, 2) = s * s;
        if (basis == 6) {
          const double v = paths.variance(n, m);
          const double sig = opts.vol_basis == VolBasis::Sqrt ? std::sqrt(v) : v;
          x(r, 3) = sig;
          x(r, 4) = sig * sig;
          x(r, 5) = sig * s;
        }
        y(r) = cash[n];
      }
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
      if (qr.rank() < basis) return std::nullopt;
      Eigen::VectorXd beta = qr.solve(y);
      Eigen::VectorXd fitted = x * beta;
      return fitted;
    };

    std::optional<Eigen::VectorXd> cont;
    if (have_vol) cont = fit(6);
    if (!cont) {
      if (have_vol && itm.size() >= 7) ++res.reduced_basis_steps;
      cont = fit(3);
    }
    if (!cont) continue;
    for (std::size_t i = 0; i < itm.size(); ++i) {
      const std::size_t n = itm[i];
      const double ex = payoff(spec.right, paths.spot(n, m), spec.strike);
      if (ex >= (*cont)(static_cast<Eigen::Index>(i))) {
        cash[n] = ex;
        exercised[n] = 1;
      }
    }
  }
  for (auto& c : cash) c *= step_disc;

  static_cast<PricingResult&>(res) = PricingResult::from_samples(cash);
  std::size_t count = 0;
  for (char e : exercised) count += e ? 1 : 0;
  res.exercised_fraction = static_cast<double>(count) / static_cast<double>(n_paths);
  return res;
}

/// Routes a Monte Carlo spec to its pricer.
inline PricingResult price_on_paths(const AssetPaths& paths, const OptionSpec& spec, const MarketEnv& env) {
  spec.validate(env);
  switch (spec.style) {
    case ExerciseStyle::European: return mc_european(paths, spec, env);
    case ExerciseStyle::American: return lsm_american(paths, spec, env);
    case ExerciseStyle::AsianArithmetic: return mc_asian(paths, spec, env);
    case ExerciseStyle::BarrierDownOut:
    case ExerciseStyle::BarrierUpOut: return mc_barrier(paths, spec, env);
  }
  throw ValidationError("unknown exercise style");
}

// ---------------------------------------------------------------------------
// Bootstrap

struct BootstrapRow {
  int n_paths = 0;
  int repeat = 0;
  double price = 0.0;
  double std_error = 0.0;
};

using SeededPricer = std::function<PricingResult(int n_paths, std::uint64_t master_seed)>;

/// Reprices n_repeats times per path count with independent master seeds
/// derived from (seed, N, repeat).
inline std::vector<BootstrapRow> bootstrap(const SeededPricer& pricer, int n_repeats,
                                           std::span<const int> n_list, std::uint64_t seed) {
  detail::require(n_repeats >= 1, "bootstrap: n_repeats must be >= 1");
  std::vector<BootstrapRow> rows;
  for (int n : n_list) {
    detail::require(n >= 1, "bootstrap: path counts must be positive");
    for (int r = 0; r < n_repeats; ++r) {
      const auto res = pricer(n, derive_seed(seed, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(r)));
      rows.push_back({n, r, res.price, res.std_error});
    }
  }
  return rows;
}

/// Interquartile range (linear interpolation between order statistics).
inline double interquartile_range(std::vector<double> x) {
  detail::require(x.size() >= 2, "interquartile_range: need at least two values");
  std::sort(x.begin(), x.end());
  auto q = [&](double p) {
    const double pos = p * static_cast<double>(x.size() - 1);
    const auto i = static_cast<std::size_t>(pos);
    const double w = pos - static_cast<double>(i);
    return i + 1 < x.size() ? (1.0 - w) * x[i] + w * x[i + 1] : x[i];
  };
  return q(0.75) - q(0.25);
}

}  // namespace cgmysv
