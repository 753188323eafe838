// Least-squares calibration of CGMYSV (and the CGMY benchmark) to option
// chains: European quotes through the FFT pricer, American quotes through
// fixed-seed Longstaff-Schwartz. Derivative-free box-constrained simplex
// search with multi-start.
#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cgmysv/errors.hpp"
#include "cgmysv/parallel.hpp"
#include "cgmysv/pricing.hpp"
#include "cgmysv/randkit.hpp"

namespace cgmysv {

struct OptionQuote {
  std::string expiry;  // ISO date, informational
  double days = 0.0;   // calendar days to expiry
  double strike = 0.0;
  double maturity = 0.0;  // years under the chain's day count
  OptionRight right = OptionRight::Call;
  ExerciseStyle style = ExerciseStyle::European;
  double price = 0.0;
};

struct OptionChain {
  std::string quote_date;
  double spot = 0.0;
  double r = 0.0;
  double q = 0.0;
  std::vector<OptionQuote> quotes;

  MarketEnv env() const { return {spot, r, q}; }

  void validate() const {
    detail::require(!quotes.empty(), "OptionChain: at least one quote required");
    detail::require(spot > 0.0, "OptionChain: spot must be positive");
    for (const auto& o : quotes) {
      detail::require(o.strike > 0.0 && o.maturity > 0.0, "OptionChain: strikes and maturities must be positive");
      detail::require(o.price > 0.0, "OptionChain: prices must be positive");
    }
  }

  /// Quotes with the given style and right, as a chain of their own.
  OptionChain select(ExerciseStyle style, OptionRight right) const {
    OptionChain out{quote_date, spot, r, q, {}};
    for (const auto& o : quotes)
      if (o.style == style && o.right == right) out.quotes.push_back(o);
    return out;
  }
};

// ---------------------------------------------------------------------------
// Error estimators. P-hat is the observed (market) price, P the model price.

struct ErrorReport {
  double aae = 0.0;
  double ape = 0.0;
  double arpe = 0.0;
  double rmse = 0.0;
  std::size_t n = 0;
  std::size_t arpe_excluded = 0;  // market price below kArpeFloor
};

inline constexpr double kArpeFloor = 0.10;

inline ErrorReport error_metrics(std::span<const double> model, std::span<const double> market) {
  detail::require(model.size() == market.size(), "error_metrics: length mismatch");
  detail::require(!model.empty(), "error_metrics: at least one quote required");
  ErrorReport r;
  r.n = model.size();
  double abs_sum = 0.0, sq_sum = 0.0, market_sum = 0.0, rel_sum = 0.0;
  std::size_t rel_n = 0;
  for (std::size_t j = 0; j < model.size(); ++j) {
    const double e = std::abs(market[j] - model[j]);
    abs_sum += e;
    sq_sum += e * e;
    market_sum += market[j];
    if (market[j] >= kArpeFloor) {
      rel_sum += e / market[j];
      ++rel_n;
    } else {
      ++r.arpe_excluded;
    }
  }
  const double n = static_cast<double>(r.n);
  r.aae = abs_sum / n;
  r.ape = market_sum > 0.0 ? r.aae / (market_sum / n) : 0.0;
  r.arpe = rel_n ? rel_sum / static_cast<double>(rel_n) : 0.0;
  r.rmse = std::sqrt(sq_sum / n);
  return r;
}

// ---------------------------------------------------------------------------
// Box-constrained Nelder-Mead

struct Bounds {
  std::vector<double> lower;
  std::vector<double> upper;

  bool contains(std::span<const double> x) const {
    for (std::size_t i = 0; i < x.size(); ++i)
      if (x[i] < lower[i] || x[i] > upper[i]) return false;
    return true;
  }

  /// Mirror image at the violated bound, then clamp.
  void reflect(std::vector<double>& x) const {
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i] < lower[i]) x[i] = lower[i] + (lower[i] - x[i]);
      if (x[i] > upper[i]) x[i] = upper[i] - (x[i] - upper[i]);
      x[i] = std::clamp(x[i], lower[i], upper[i]);
    }
  }
};

struct TraceRow {
  int start = 0;
  int iteration = 0;
  int evaluations = 0;
  double objective = 0.0;
  std::vector<double> x;
};

struct OptimResult {
  std::vector<double> x;
  double objective = std::numeric_limits<double>::infinity();
  int evaluations = 0;
  bool converged = false;
  std::vector<TraceRow> trace;
};

struct SimplexOptions {
  int max_evaluations = 2000;
  double f_tolerance = 1e-10;  // spread of objective values across the simplex
  double x_tolerance = 1e-9;   // relative simplex diameter
  double initial_step = 0.10;  // relative to |x0| (absolute 0.1 for zeros)
  int restarts = 2;            // fresh simplex around the optimum after convergence
};

using Objective = std::function<double(std::span<const double>)>;

inline OptimResult nelder_mead(const Objective& f, std::vector<double> x0, const Bounds& bounds,
                               const SimplexOptions& opts = {}, int start_index = 0) {
  const std::size_t n = x0.size();
  detail::require(bounds.lower.size() == n && bounds.upper.size() == n, "nelder_mead: bounds dimension mismatch");
  bounds.reflect(x0);

  OptimResult res;
  auto eval = [&](const std::vector<double>& x) {
    ++res.evaluations;
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::max();
  };

  std::vector<std::vector<double>> simplex;
  std::vector<double> fv;
  auto build = [&](const std::vector<double>& centre, double centre_value) {
    simplex.assign(1, centre);
    fv.assign(1, centre_value);
    for (std::size_t i = 0; i < n; ++i) {
      auto x = centre;
      const double h = centre[i] != 0.0 ? opts.initial_step * std::abs(centre[i]) : opts.initial_step;
      x[i] += (x[i] + h <= bounds.upper[i]) ? h : -h;
      bounds.reflect(x);
      simplex.push_back(x);
      fv.push_back(eval(x));
    }
  };
  build(x0, eval(x0));

  int iteration = 0;
  for (int round = 0; round <= opts.restarts; ++round) {
    if (round > 0) build(simplex[0], fv[0]);
    bool done = false;
    while (!done && res.evaluations < opts.max_evaluations) {
      std::vector<std::size_t> order(n + 1);
      for (std::size_t i = 0; i <= n; ++i) order[i] = i;
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
      std::vector<std::vector<double>> s2;
      std::vector<double> f2;
      for (auto i : order) {
        s2.push_back(simplex[i]);
        f2.push_back(fv[i]);
      }
      simplex.swap(s2);
      fv.swap(f2);
      res.trace.push_back({start_index, iteration++, res.evaluations, fv[0], simplex[0]});

      double diameter = 0.0;
      for (std::size_t i = 1; i <= n; ++i)
        for (std::size_t k = 0; k < n; ++k)
          diameter = std::max(diameter, std::abs(simplex[i][k] - simplex[0][k]) / std::max(1.0, std::abs(simplex[0][k])));
      if (fv[n] - fv[0] <= opts.f_tolerance * (1.0 + std::abs(fv[0])) || diameter < opts.x_tolerance) {
        done = true;
        break;
      }

      std::vector<double> centroid(n, 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k) centroid[k] += simplex[i][k] / static_cast<double>(n);
      auto along = [&](double t) {
        std::vector<double> x(n);
        for (std::size_t k = 0; k < n; ++k) x[k] = centroid[k] + t * (simplex[n][k] - centroid[k]);
        bounds.reflect(x);
        return x;
      };

      const auto xr = along(-1.0);
      const double fr = eval(xr);
      if (fr < fv[0]) {
        const auto xe = along(-2.0);
        const double fe = eval(xe);
        if (fe < fr) {
          simplex[n] = xe;
          fv[n] = fe;
        } else {
          simplex[n] = xr;
          fv[n] = fr;
        }
      } else if (fr < fv[n - 1]) {
        simplex[n] = xr;
        fv[n] = fr;
      } else {
        const bool outside = fr < fv[n];
        const auto xc = along(outside ? -0.5 : 0.5);
        const double fc = eval(xc);
        if (fc < (outside ? fr : fv[n])) {
          simplex[n] = xc;
          fv[n] = fc;
        } else {
          for (std::size_t i = 1; i <= n; ++i) {
            for (std::size_t k = 0; k < n; ++k) simplex[i][k] = simplex[0][k] + 0.5 * (simplex[i][k] - simplex[0][k]);
            bounds.reflect(simplex[i]);
            fv[i] = eval(simplex[i]);
          }
        }
      }
    }
    res.converged = done;
    if (!done) break;
  }
  const auto best = std::min_element(fv.begin(), fv.end()) - fv.begin();
  res.x = simplex[best];
  res.objective = fv[best];
  res.trace.push_back({start_index, iteration, res.evaluations, res.objective, res.x});
  return res;
}

struct MultiStartOptions {
  int starts = 5;
  double spread = 0.25;  // log-normal perturbation of additional starts
  std::uint64_t seed = 1;
  unsigned threads = 1;
  SimplexOptions simplex{};
};

/// Runs Nelder-Mead from x0 and from starts-1 perturbed copies of it; the
/// trace concatenates all runs (tagged by start index).
inline OptimResult multi_start(const Objective& f, const std::vector<double>& x0, const Bounds& bounds,
                               const MultiStartOptions& opts = {}) {
  detail::require(opts.starts >= 1, "multi_start: at least one start");
  std::vector<std::vector<double>> starts{x0};
  VariateStream rng({opts.seed, 0, Substream::SeriesU});
  for (int s = 1; s < opts.starts; ++s) {
    auto x = x0;
    for (auto& xi : x) xi = xi != 0.0 ? xi * std::exp(opts.spread * rng.normal()) : opts.spread * rng.normal();
    bounds.reflect(x);
    starts.push_back(x);
  }
  std::vector<OptimResult> runs(starts.size());
  parallel_for(starts.size(), opts.threads, [&](std::size_t s) {
    runs[s] = nelder_mead(f, starts[s], bounds, opts.simplex, static_cast<int>(s));
  });
  OptimResult best;
  for (auto& r : runs) {
    best.evaluations += r.evaluations;
    best.trace.insert(best.trace.end(), r.trace.begin(), r.trace.end());
    if (r.objective < best.objective) {
      best.objective = r.objective;
      best.x = r.x;
      best.converged = r.converged;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Parameter vectors

inline constexpr std::array<const char*, 8> kCgmysvNames{"alpha", "lambda_plus", "lambda_minus", "kappa",
                                                         "eta",   "zeta",        "rho",          "v0"};
inline constexpr std::array<const char*, 4> kCgmyNames{"alpha", "C", "lambda_plus", "lambda_minus"};

inline std::vector<double> to_vector(const CgmysvParams& p) {
  return {p.alpha, p.lambda_plus, p.lambda_minus, p.kappa, p.eta, p.zeta, p.rho, p.v0};
}

/// alpha is kept off the excluded value 1 by a small gap.
inline double away_from_one(double alpha) {
  constexpr double gap = 1e-4;
  if (std::abs(alpha - 1.0) < gap) return alpha < 1.0 ? 1.0 - gap : 1.0 + gap;
  return alpha;
}

inline CgmysvParams cgmysv_from_vector(std::span<const double> x) {
  return {away_from_one(x[0]), x[1], x[2], x[3], x[4], x[5], x[6], x[7]};
}

inline std::vector<double> to_vector(const CgmyParams& p) { return {p.alpha, p.c_scale, p.lambda_plus, p.lambda_minus}; }

inline CgmyParams cgmy_from_vector(std::span<const double> x) { return {away_from_one(x[0]), x[1], x[2], x[3], 0.0}; }

inline Bounds default_cgmysv_bounds() {
  return {{0.001, 1.001, 0.01, 0.001, 1e-4, 0.001, -10.0, 1e-4},
          {1.999, 200.0, 200.0, 20.0, 2.0, 5.0, 10.0, 2.0}};
}

inline Bounds default_cgmy_bounds() { return {{0.001, 1e-4, 1.001, 0.01}, {1.999, 100.0, 200.0, 200.0}}; }

// ---------------------------------------------------------------------------
// Calibration

struct CalibrationOptions {
  MultiStartOptions search{};
  FftConfig fft = [] {
    FftConfig c;
    c.tolerance = 1e-7;
    return c;
  }();
};

/// Monte Carlo settings of the American objective; the seed is fixed across
/// objective evaluations (common random numbers).
struct AmericanMcConfig {
  int paths = 10'000;
  int terms = 1024;
  double steps_per_day = 1.0;  // grid steps per calendar day of maturity
  std::uint64_t master_seed = 1;
  unsigned threads = 1;
  LsmOptions lsm{};
};

template <typename Params>
struct CalibrationResult {
  Params params{};
  ErrorReport report{};
  std::vector<double> model_prices;
  std::vector<TraceRow> trace;
  bool converged = false;
  bool degenerate = false;  // fewer quotes than free parameters
  int evaluations = 0;
};

inline constexpr double kPenalty = 1e10;

namespace detail {

inline std::map<double, std::vector<std::size_t>> by_maturity(const OptionChain& chain) {
  std::map<double, std::vector<std::size_t>> groups;
  for (std::size_t j = 0; j < chain.quotes.size(); ++j) groups[chain.quotes[j].maturity].push_back(j);
  return groups;
}

inline double rmse_or_penalty(const std::vector<double>& model, const OptionChain& chain) {
  std::vector<double> market(chain.quotes.size());
  for (std::size_t j = 0; j < market.size(); ++j) market[j] = chain.quotes[j].price;
  for (double m : model)
    if (!std::isfinite(m)) return kPenalty;
  return error_metrics(model, market).rmse;
}

inline std::vector<double> market_prices(const OptionChain& chain) {
  std::vector<double> out;
  for (const auto& o : chain.quotes) out.push_back(o.price);
  return out;
}

inline int grid_steps(const OptionQuote& o, double steps_per_day) {
  return std::max(1, static_cast<int>(std::lround(o.days * steps_per_day)));
}

}  // namespace detail

/// FFT prices of every quote in the chain (puts through parity).
inline std::vector<double> fft_chain_prices(const CgmysvParams& p, const OptionChain& chain, const FftConfig& cfg = {}) {
  std::vector<double> out(chain.quotes.size());
  const auto env = chain.env();
  for (const auto& [T, idx] : detail::by_maturity(chain)) {
    const auto grid = carr_madan_calls(cgmysv_log_return_cf(p, T), env, T, cfg, p.lambda_plus);
    for (auto j : idx) {
      const auto& o = chain.quotes[j];
      const double k = o.strike;
      out[j] = prices_from_call_grid(grid, env, o.right, T, std::span<const double>(&k, 1))[0];
    }
  }
  return out;
}

inline double european_objective(const CgmysvParams& p, const OptionChain& chain, const FftConfig& cfg) {
  try {
    p.validate();
    return detail::rmse_or_penalty(fft_chain_prices(p, chain, cfg), chain);
  } catch (const std::exception&) {
    return kPenalty;
  }
}

inline CalibrationResult<CgmysvParams> calibrate_european(const OptionChain& chain, const CgmysvParams& initial,
                                                          const Bounds& bounds = default_cgmysv_bounds(),
                                                          const CalibrationOptions& opts = {}) {
  chain.validate();
  for (const auto& o : chain.quotes)
    detail::require(o.style == ExerciseStyle::European, "calibrate_european: chain contains non-European quotes");
  const auto x0 = to_vector(initial);
  detail::require(bounds.contains(x0), "calibrate_european: initial parameters outside bounds");

  const Objective f = [&](std::span<const double> x) {
    return european_objective(cgmysv_from_vector(x), chain, opts.fft);
  };
  const auto best = multi_start(f, x0, bounds, opts.search);

  CalibrationResult<CgmysvParams> out;
  out.params = cgmysv_from_vector(best.x);
  out.model_prices = fft_chain_prices(out.params, chain, opts.fft);
  out.report = error_metrics(out.model_prices, detail::market_prices(chain));
  out.trace = best.trace;
  out.converged = best.converged;
  out.degenerate = chain.quotes.size() < kCgmysvNames.size();
  out.evaluations = best.evaluations;
  return out;
}

/// LSM prices of an American chain with common random numbers: paths for
/// each maturity are generated from the fixed seeds in cfg.
inline std::vector<double> lsm_chain_prices(const CgmysvParams& p, const OptionChain& chain, const AmericanMcConfig& cfg) {
  std::vector<double> out(chain.quotes.size());
  const auto env = chain.env();
  for (const auto& [T, idx] : detail::by_maturity(chain)) {
    const int steps = detail::grid_steps(chain.quotes[idx.front()], cfg.steps_per_day);
    const auto paths = spot_paths(p, env, T, steps, cfg.paths, cfg.terms, StreamSeeds(cfg.master_seed), cfg.threads);
    for (auto j : idx) {
      const auto& o = chain.quotes[j];
      out[j] = lsm_american(paths, {o.strike, T, o.right, ExerciseStyle::American, std::nullopt}, env, cfg.lsm).price;
    }
  }
  return out;
}

inline std::vector<double> lsm_chain_prices(const CgmyParams& p, const OptionChain& chain, const AmericanMcConfig& cfg) {
  std::vector<double> out(chain.quotes.size());
  const auto env = chain.env();
  for (const auto& [T, idx] : detail::by_maturity(chain)) {
    const int steps = detail::grid_steps(chain.quotes[idx.front()], cfg.steps_per_day);
    const auto paths = cgmy_spot_paths(p, env, T, steps, cfg.paths, cfg.terms, cfg.master_seed, cfg.threads);
    for (auto j : idx) {
      const auto& o = chain.quotes[j];
      out[j] = lsm_american(paths, {o.strike, T, o.right, ExerciseStyle::American, std::nullopt}, env, cfg.lsm).price;
    }
  }
  return out;
}

template <typename Params>
double american_objective(const Params& p, const OptionChain& chain, const AmericanMcConfig& cfg) {
  try {
    p.validate();
    return detail::rmse_or_penalty(lsm_chain_prices(p, chain, cfg), chain);
  } catch (const std::exception&) {
    return kPenalty;
  }
}

namespace detail {

template <typename Params, typename FromVector>
CalibrationResult<Params> calibrate_american_impl(const OptionChain& chain, const std::vector<double>& x0,
                                                  const Bounds& bounds, const AmericanMcConfig& mc,
                                                  const CalibrationOptions& opts, FromVector from_vector) {
  chain.validate();
  for (const auto& o : chain.quotes)
    require(o.style == ExerciseStyle::American, "calibrate_american: chain contains non-American quotes");
  require(bounds.contains(x0), "calibrate_american: initial parameters outside bounds");
  require(mc.paths >= 2 && mc.terms >= 1, "calibrate_american: invalid Monte Carlo settings");

  const Objective f = [&](std::span<const double> x) { return american_objective(from_vector(x), chain, mc); };
  const auto best = multi_start(f, x0, bounds, opts.search);

  CalibrationResult<Params> out;
  out.params = from_vector(best.x);
  out.model_prices = lsm_chain_prices(out.params, chain, mc);
  out.report = error_metrics(out.model_prices, market_prices(chain));
  out.trace = best.trace;
  out.converged = best.converged;
  out.degenerate = chain.quotes.size() < x0.size();
  out.evaluations = best.evaluations;
  return out;
}

}  // namespace detail

inline CalibrationResult<CgmysvParams> calibrate_american(const OptionChain& chain, const CgmysvParams& initial,
                                                          const AmericanMcConfig& mc,
                                                          const Bounds& bounds = default_cgmysv_bounds(),
                                                          const CalibrationOptions& opts = {}) {
  return detail::calibrate_american_impl<CgmysvParams>(chain, to_vector(initial), bounds, mc, opts,
                                                       [](std::span<const double> x) { return cgmysv_from_vector(x); });
}

/// CGMY benchmark: four parameters (alpha, C, lambda_+, lambda_-).
inline CalibrationResult<CgmyParams> calibrate_american(const OptionChain& chain, const CgmyParams& initial,
                                                        const AmericanMcConfig& mc,
                                                        const Bounds& bounds = default_cgmy_bounds(),
                                                        const CalibrationOptions& opts = {}) {
  return detail::calibrate_american_impl<CgmyParams>(chain, to_vector(initial), bounds, mc, opts,
                                                     [](std::span<const double> x) { return cgmy_from_vector(x); });
}

// ---------------------------------------------------------------------------
// Option-chain CSV

namespace detail {

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline std::chrono::sys_days parse_date(const std::string& s) {
  int y = 0;
  unsigned m = 0, d = 0;
  char tail = 0;
  if (std::sscanf(s.c_str(), "%d-%u-%u%c", &y, &m, &d, &tail) != 3) throw ValidationError("bad date '" + s + "'");
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!ymd.ok()) throw ValidationError("bad date '" + s + "'");
  return std::chrono::sys_days{ymd};
}

inline double parse_number(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ValidationError("bad number '" + s + "'");
  }
  if (used != s.size() || !std::isfinite(v)) throw ValidationError("bad number '" + s + "'");
  return v;
}

}  // namespace detail

inline constexpr std::array<const char*, 9> kChainColumns{"quote_date", "expiry_date", "strike", "right", "style",
                                                          "price",      "spot",        "rate",   "div_yield"};

/// Parses an option-chain CSV (header required). Any malformed row rejects
/// the whole file with its line number.
inline OptionChain parse_chain(std::istream& in, DayCount dc = DayCount::Trading252) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("option chain: empty file");
  const auto header = detail::split_csv(line);
  std::array<std::size_t, kChainColumns.size()> col{};
  for (std::size_t c = 0; c < kChainColumns.size(); ++c) {
    const auto it = std::find(header.begin(), header.end(), kChainColumns[c]);
    if (it == header.end()) throw ValidationError(std::string("option chain: missing column '") + kChainColumns[c] + "'");
    col[c] = static_cast<std::size_t>(it - header.begin());
  }

  OptionChain chain;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    try {
      const auto cells = detail::split_csv(line);
      if (cells.size() != header.size()) throw ValidationError("expected " + std::to_string(header.size()) + " fields");
      auto cell = [&](int c) -> const std::string& { return cells[col[c]]; };
      const auto quote = detail::parse_date(cell(0));
      const auto expiry = detail::parse_date(cell(1));
      const double days = static_cast<double>((expiry - quote).count());
      if (days <= 0) throw ValidationError("expiry must be after quote date");

      OptionQuote o;
      o.expiry = cell(1);
      o.days = days;
      o.maturity = year_fraction(days, dc);
      o.strike = detail::parse_number(cell(2));
      if (cell(3) == "C") o.right = OptionRight::Call;
      else if (cell(3) == "P") o.right = OptionRight::Put;
      else throw ValidationError("right must be C or P");
      if (cell(4) == "E") o.style = ExerciseStyle::European;
      else if (cell(4) == "A") o.style = ExerciseStyle::American;
      else throw ValidationError("style must be E or A");
      o.price = detail::parse_number(cell(5));
      if (o.strike <= 0.0 || o.price <= 0.0) throw ValidationError("strike and price must be positive");
      const double spot = detail::parse_number(cell(6));
      const double rate = detail::parse_number(cell(7));
      const double div = detail::parse_number(cell(8));
      if (spot <= 0.0) throw ValidationError("spot must be positive");

      if (chain.quotes.empty()) {
        chain.quote_date = cell(0);
        chain.spot = spot;
        chain.r = rate;
        chain.q = div;
      } else if (cell(0) != chain.quote_date || spot != chain.spot || rate != chain.r || div != chain.q) {
        throw ValidationError("quote_date, spot, rate and div_yield must be constant across the chain");
      }
      chain.quotes.push_back(o);
    } catch (const ValidationError& e) {
      throw ValidationError("option chain line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (chain.quotes.empty()) throw ValidationError("option chain: no quotes");
  return chain;
}

inline OptionChain read_chain_csv(const std::string& path, DayCount dc = DayCount::Trading252) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open option chain '" + path + "'");
  return parse_chain(in, dc);
}

}  // namespace cgmysv
