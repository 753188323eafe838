// Subcommands of the cgmysv command-line tool. Each command validates its
// inputs, computes, and returns named CSV tables; nothing is written until
// the whole computation has succeeded.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cgmysv/calibration.hpp"
#include "cgmysv/cgmysv.hpp"
#include "cgmysv/density.hpp"
#include "cgmysv/pricing.hpp"

namespace cgmysv::cli {

// ---------------------------------------------------------------------------
// CSV tables

struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  bool operator==(const Csv&) const = default;
};

inline std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string num(int x) { return std::to_string(x); }
inline std::string num(std::size_t x) { return std::to_string(x); }

inline double to_double(const std::string& s) { return detail::parse_number(s); }

inline void write_csv(std::ostream& out, const Csv& t) {
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
  };
  line(t.header);
  for (const auto& r : t.rows) line(r);
}

inline Csv parse_csv(std::istream& in) {
  Csv t;
  std::string line;
  if (!std::getline(in, line)) return t;
  t.header = detail::split_csv(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = detail::split_csv(line);
    cells.resize(t.header.size());
    t.rows.push_back(std::move(cells));
  }
  return t;
}

inline Csv read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return parse_csv(in);
}

using Outputs = std::vector<std::pair<std::string, Csv>>;

inline void write_outputs(const std::filesystem::path& dir, const Outputs& outputs) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  for (const auto& [name, table] : outputs) {
    const auto path = dir / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    write_csv(out, table);
    if (!out) throw IoError("write failed for '" + path.string() + "'");
  }
}

// ---------------------------------------------------------------------------
// Run configuration

enum class ModelKind { Cgmysv, Cgmy };

struct RunConfig {
  ModelKind model = ModelKind::Cgmysv;
  CgmysvParams params{};
  double cgmy_c = 1.0;  // C of the CGMY benchmark (alpha, lambdas shared)
  MarketEnv env{2488.11, 0.01213, 0.01884};
  double maturity_days = 100.0;
  int steps = 100;
  int paths = 10'000;
  int terms = 1024;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  DayCount day_count = DayCount::Trading252;
  std::string out_dir = "out";

  double horizon() const { return year_fraction(maturity_days, day_count); }

  CgmyParams cgmy() const { return {params.alpha, cgmy_c, params.lambda_plus, params.lambda_minus, 0.0}; }

  void validate() const {
    detail::require(maturity_days > 0.0, "config: maturity_days must be positive");
    detail::require(steps >= 1, "config: steps (M) must be >= 1");
    detail::require(paths >= 1, "config: paths (N) must be >= 1");
    detail::require(terms >= 1, "config: terms (J) must be >= 1");
    env.validate();
    if (model == ModelKind::Cgmysv) params.validate();
    else cgmy().validate();
  }

  void require_cgmysv(const char* command) const {
    detail::require(model == ModelKind::Cgmysv, std::string(command) + ": supported for the cgmysv model only");
  }
};

// ---------------------------------------------------------------------------
// simulate

struct SampleMoments {
  double mean = 0.0, var = 0.0, skew = 0.0, kurt = 0.0;
};

inline SampleMoments sample_moments(const std::vector<double>& x) {
  SampleMoments m;
  const double n = static_cast<double>(x.size());
  for (double v : x) m.mean += v / n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = v - m.mean;
    m2 += d * d / n;
    m3 += d * d * d / n;
    m4 += d * d * d * d / n;
  }
  m.var = m2;
  if (m2 > 0.0) {
    m.skew = m3 / std::pow(m2, 1.5);
    m.kurt = m4 / (m2 * m2);
  }
  return m;
}

inline Outputs cmd_simulate(const RunConfig& cfg) {
  cfg.validate();
  cfg.require_cgmysv("simulate");
  const auto ps = generate_paths(cfg.params, cfg.horizon(), cfg.steps, cfg.paths, cfg.terms, StreamSeeds(cfg.seed),
                                 {false, cfg.threads});
  Csv paths{{"path_id", "t", "v", "L"}, {}};
  paths.rows.reserve(ps.paths() * ps.times.size());
  for (std::size_t n = 0; n < ps.paths(); ++n)
    for (std::size_t k = 0; k < ps.times.size(); ++k)
      paths.rows.push_back({num(n), num(ps.times[k]), num(ps.v(n, k)), num(ps.L(n, k))});

  Csv summary{{"step", "t", "mean", "variance", "skewness", "kurtosis"}, {}};
  for (std::size_t k = 1; k < ps.times.size(); ++k) {
    const auto m = sample_moments(ps.L.column(k));
    summary.rows.push_back({num(k), num(ps.times[k]), num(m.mean), num(m.var), num(m.skew), num(m.kurt)});
  }
  return {{"paths.csv", std::move(paths)}, {"summary.csv", std::move(summary)}};
}

// ---------------------------------------------------------------------------
// kstest

/// Horizons in steps of 1/days_per_year, deduplicated and sorted.
inline std::vector<int> normalize_horizons(const std::vector<int>& horizons) {
  for (int h : horizons) detail::require(h >= 1, "horizons must be positive step counts");
  std::set<int> s(horizons.begin(), horizons.end());
  return {s.begin(), s.end()};
}

inline Outputs cmd_kstest(const RunConfig& cfg, const std::vector<int>& horizon_list) {
  cfg.validate();
  cfg.require_cgmysv("kstest");
  const auto horizons = normalize_horizons(horizon_list);
  Csv out{{"horizon_days", "t", "n", "statistic", "p_value", "reject_5pct"}, {}};
  if (horizons.empty()) return {{"kstest.csv", out}};

  const int steps = horizons.back();
  const double dt = 1.0 / days_per_year(cfg.day_count);
  const auto ps = generate_paths(cfg.params, steps * dt, steps, cfg.paths, cfg.terms, StreamSeeds(cfg.seed),
                                 {false, cfg.threads});
  for (int h : horizons) {
    auto sample = ps.L.column(static_cast<std::size_t>(h));
    std::sort(sample.begin(), sample.end());
    const double t = ps.times[static_cast<std::size_t>(h)];
    const auto cdf = cgmysv_cdf(cfg.params, t);
    const auto r = ks_test(sample, cdf);
    out.rows.push_back({num(h), num(t), num(sample.size()), num(r.statistic), num(r.p_value),
                        r.p_value < 0.05 ? "1" : "0"});
  }
  return {{"kstest.csv", std::move(out)}};
}

// ---------------------------------------------------------------------------
// pdf

inline Outputs cmd_pdf(const RunConfig& cfg, const std::vector<int>& horizon_list, int points = 1001) {
  cfg.validate();
  cfg.require_cgmysv("pdf");
  detail::require(points >= 2, "pdf: points must be >= 2");
  Outputs out;
  for (int h : normalize_horizons(horizon_list)) {
    const double t = year_fraction(h, cfg.day_count);
    const auto cf = cgmysv_cf_at(cfg.params, t);
    const auto grid = make_inversion_grid(cf, cgmysv_grid_hints(cfg.params, t));
    const auto pdf = pdf_from_cf(cf, grid);
    const auto cdf = cdf_from_cf(cf, grid);
    // Window between the 1e-7 and 1 - 1e-7 quantiles of the inverted CDF.
    std::size_t lo_k = 0, hi_k = cdf.x.size() - 1;
    while (lo_k + 1 < cdf.x.size() && cdf.y[lo_k + 1] < 1e-7) ++lo_k;
    while (hi_k > lo_k + 1 && cdf.y[hi_k - 1] > 1.0 - 1e-7) --hi_k;
    const double lo = cdf.x[lo_k], hi = cdf.x[hi_k];
    Csv p{{"x", "pdf"}, {}}, c{{"x", "cdf"}, {}};
    for (int i = 0; i < points; ++i) {
      const double x = lo + (hi - lo) * i / (points - 1);
      p.rows.push_back({num(x), num(std::max(0.0, pdf(x)))});
      c.rows.push_back({num(x), num(cdf(x))});
    }
    out.emplace_back("pdf_" + std::to_string(h) + "d.csv", std::move(p));
    out.emplace_back("cdf_" + std::to_string(h) + "d.csv", std::move(c));
  }
  return out;
}

// ---------------------------------------------------------------------------
// price

struct ParsedSpec {
  std::string text;
  OptionSpec spec;
  double days = 0.0;
};

inline ExerciseStyle parse_style(const std::string& s) {
  if (s == "european" || s == "E") return ExerciseStyle::European;
  if (s == "american" || s == "A") return ExerciseStyle::American;
  if (s == "asian") return ExerciseStyle::AsianArithmetic;
  if (s == "down-out") return ExerciseStyle::BarrierDownOut;
  if (s == "up-out") return ExerciseStyle::BarrierUpOut;
  throw ValidationError("unknown style '" + s + "'");
}

inline const char* style_name(ExerciseStyle s) {
  switch (s) {
    case ExerciseStyle::European: return "european";
    case ExerciseStyle::American: return "american";
    case ExerciseStyle::AsianArithmetic: return "asian";
    case ExerciseStyle::BarrierDownOut: return "down-out";
    case ExerciseStyle::BarrierUpOut: return "up-out";
  }
  return "?";
}

inline OptionRight parse_right(const std::string& s) {
  if (s == "call" || s == "C") return OptionRight::Call;
  if (s == "put" || s == "P") return OptionRight::Put;
  throw ValidationError("unknown right '" + s + "'");
}

/// "<style> <right> <strike> [barrier] [days=<d>]", e.g. "down-out call 2500 2400".
inline ParsedSpec parse_spec(const std::string& text, const RunConfig& cfg) {
  std::istringstream in(text);
  std::vector<std::string> tok;
  for (std::string w; in >> w;) tok.push_back(w);
  detail::require(tok.size() >= 3, "option spec '" + text + "': expected <style> <right> <strike>");
  ParsedSpec p{text, {}, cfg.maturity_days};
  p.spec.style = parse_style(tok[0]);
  p.spec.right = parse_right(tok[1]);
  p.spec.strike = to_double(tok[2]);
  for (std::size_t i = 3; i < tok.size(); ++i) {
    if (tok[i].rfind("days=", 0) == 0) p.days = to_double(tok[i].substr(5));
    else p.spec.barrier = to_double(tok[i]);
  }
  detail::require(p.days > 0.0, "option spec '" + text + "': days must be positive");
  p.spec.maturity = year_fraction(p.days, cfg.day_count);
  p.spec.validate(cfg.env);
  return p;
}

/// Grid steps for a maturity, keeping the configured steps per day.
inline int steps_for(const RunConfig& cfg, double days) {
  return std::max(1, static_cast<int>(std::lround(cfg.steps * days / cfg.maturity_days)));
}

inline AssetPaths model_paths(const RunConfig& cfg, double maturity, int steps, int paths, std::uint64_t seed) {
  if (cfg.model == ModelKind::Cgmy)
    return cgmy_spot_paths(cfg.cgmy(), cfg.env, maturity, steps, paths, cfg.terms, seed, cfg.threads);
  return spot_paths(cfg.params, cfg.env, maturity, steps, paths, cfg.terms, StreamSeeds(seed), cfg.threads);
}

inline double model_fft(const RunConfig& cfg, const OptionSpec& s) {
  const double k = s.strike;
  const std::span<const double> strikes(&k, 1);
  if (cfg.model == ModelKind::Cgmy) return fft_european(cfg.cgmy(), cfg.env, s.right, s.maturity, strikes)[0];
  return fft_european(cfg.params, cfg.env, s.right, s.maturity, strikes)[0];
}

inline Outputs cmd_price(const RunConfig& cfg, const std::vector<std::string>& specs, std::ostream& log = std::cerr) {
  cfg.validate();
  Csv out{{"spec", "style", "right", "strike", "barrier", "days", "method", "price", "std_error", "ci_low", "ci_high",
           "n_paths", "status"},
          {}};
  std::vector<ParsedSpec> parsed;
  for (const auto& text : specs) {
    try {
      parsed.push_back(parse_spec(text, cfg));
    } catch (const std::exception& e) {
      log << "price: " << e.what() << '\n';
      out.rows.push_back({text, "", "", "", "", "", "", "", "", "", "", "", std::string("error: ") + e.what()});
    }
  }

  std::map<double, AssetPaths> by_days;
  for (const auto& p : parsed) {
    std::vector<std::string> base{p.text,
                                  style_name(p.spec.style),
                                  p.spec.right == OptionRight::Call ? "call" : "put",
                                  num(p.spec.strike),
                                  p.spec.barrier ? num(*p.spec.barrier) : "",
                                  num(p.days)};
    auto emit = [&](const char* method, const PricingResult& r) {
      auto row = base;
      for (auto s : {std::string(method), num(r.price), num(r.std_error), num(r.ci_low), num(r.ci_high),
                     num(r.n_paths), std::string("ok")})
        row.push_back(s);
      out.rows.push_back(std::move(row));
    };
    try {
      if (p.spec.style == ExerciseStyle::European) emit("fft", PricingResult::exact(model_fft(cfg, p.spec)));
      auto it = by_days.find(p.days);
      if (it == by_days.end())
        it = by_days.emplace(p.days, model_paths(cfg, p.spec.maturity, steps_for(cfg, p.days), cfg.paths, cfg.seed)).first;
      emit(p.spec.style == ExerciseStyle::American ? "lsm" : "mc", price_on_paths(it->second, p.spec, cfg.env));
    } catch (const ValidationError& e) {
      log << "price: " << p.text << ": " << e.what() << '\n';
      auto row = base;
      row.resize(out.header.size() - 1);
      row.push_back(std::string("error: ") + e.what());
      out.rows.push_back(std::move(row));
    }
  }
  return {{"prices.csv", std::move(out)}};
}

// ---------------------------------------------------------------------------
// bootstrap

inline Outputs cmd_bootstrap(const RunConfig& cfg, const std::string& spec_text, const std::vector<int>& n_list,
                             int repeats) {
  cfg.validate();
  const auto p = parse_spec(spec_text, cfg);
  detail::require(!n_list.empty(), "bootstrap: at least one path count required");
  const int steps = steps_for(cfg, p.days);
  const SeededPricer pricer = [&](int n, std::uint64_t seed) {
    return price_on_paths(model_paths(cfg, p.spec.maturity, steps, n, seed), p.spec, cfg.env);
  };
  const auto rows = bootstrap(pricer, repeats, n_list, cfg.seed);

  Csv table{{"n_paths", "repeat", "price", "std_error"}, {}};
  std::map<int, std::vector<double>> prices;
  for (const auto& r : rows) {
    table.rows.push_back({num(r.n_paths), num(r.repeat), num(r.price), num(r.std_error)});
    prices[r.n_paths].push_back(r.price);
  }
  Csv summary{{"n_paths", "mean", "iqr"}, {}};
  for (int n : n_list) {
    const auto& v = prices[n];
    double mean = 0.0;
    for (double x : v) mean += x / static_cast<double>(v.size());
    summary.rows.push_back({num(n), num(mean), num(v.size() >= 2 ? interquartile_range(v) : 0.0)});
  }
  return {{"bootstrap.csv", std::move(table)}, {"bootstrap_summary.csv", std::move(summary)}};
}

// ---------------------------------------------------------------------------
// calibrate

struct CalibrateSettings {
  std::string chain_file;
  int starts = 5;
  int max_evaluations = 5000;
  double steps_per_day = 1.0;
};

template <typename Params>
void append_calibration(Outputs& out, const std::string& tag, const OptionChain& chain,
                        const CalibrationResult<Params>& r, std::span<const char* const> names) {
  const auto x = to_vector(r.params);
  Csv params{{"name", "value"}, {}};
  for (std::size_t i = 0; i < x.size(); ++i) params.rows.push_back({names[i], num(x[i])});

  Csv errors{{"aae", "ape", "arpe", "rmse", "n", "arpe_excluded", "converged", "degenerate", "evaluations"}, {}};
  errors.rows.push_back({num(r.report.aae), num(r.report.ape), num(r.report.arpe), num(r.report.rmse), num(r.report.n),
                         num(r.report.arpe_excluded), r.converged ? "1" : "0", r.degenerate ? "1" : "0",
                         num(r.evaluations)});

  Csv trace{{"start", "iteration", "evaluations", "rmse"}, {}};
  for (auto n : names) trace.header.push_back(n);
  for (const auto& row : r.trace) {
    std::vector<std::string> cells{num(row.start), num(row.iteration), num(row.evaluations), num(row.objective)};
    for (double v : row.x) cells.push_back(num(v));
    trace.rows.push_back(std::move(cells));
  }

  Csv fit{{"expiry_date", "days", "strike", "market", "model"}, {}};
  for (std::size_t j = 0; j < chain.quotes.size(); ++j) {
    const auto& q = chain.quotes[j];
    fit.rows.push_back({q.expiry, num(q.days), num(q.strike), num(q.price), num(r.model_prices[j])});
  }
  out.emplace_back("calibration_" + tag + "_params.csv", std::move(params));
  out.emplace_back("calibration_" + tag + "_errors.csv", std::move(errors));
  out.emplace_back("calibration_" + tag + "_trace.csv", std::move(trace));
  out.emplace_back("calibration_" + tag + "_fit.csv", std::move(fit));
}

/// Calibrates each (style, right) group of the chain separately.
inline Outputs cmd_calibrate(const RunConfig& cfg, const CalibrateSettings& s) {
  cfg.validate();
  detail::require(s.starts >= 1 && s.max_evaluations >= 1, "calibrate: starts and max_evaluations must be >= 1");
  detail::require(s.steps_per_day > 0.0, "calibrate: steps_per_day must be positive");
  const auto chain = read_chain_csv(s.chain_file, cfg.day_count);

  CalibrationOptions opts;
  opts.search.starts = s.starts;
  opts.search.seed = cfg.seed;
  opts.search.threads = cfg.threads;
  opts.search.simplex.max_evaluations = s.max_evaluations;

  AmericanMcConfig mc;
  mc.paths = cfg.paths;
  mc.terms = cfg.terms;
  mc.master_seed = cfg.seed;
  mc.steps_per_day = s.steps_per_day;

  Outputs out;
  for (auto style : {ExerciseStyle::European, ExerciseStyle::American}) {
    for (auto right : {OptionRight::Call, OptionRight::Put}) {
      const auto group = chain.select(style, right);
      if (group.quotes.empty()) continue;
      const std::string tag = std::string(style == ExerciseStyle::European ? "E" : "A") +
                              (right == OptionRight::Call ? "C" : "P");
      if (style == ExerciseStyle::European) {
        cfg.require_cgmysv("calibrate (European quotes)");
        const auto r = calibrate_european(group, cfg.params, default_cgmysv_bounds(), opts);
        append_calibration(out, tag, group, r, kCgmysvNames);
      } else if (cfg.model == ModelKind::Cgmy) {
        const auto r = calibrate_american(group, cfg.cgmy(), mc, default_cgmy_bounds(), opts);
        append_calibration(out, tag, group, r, kCgmyNames);
      } else {
        const auto r = calibrate_american(group, cfg.params, mc, default_cgmysv_bounds(), opts);
        append_calibration(out, tag, group, r, kCgmysvNames);
      }
    }
  }
  return out;
}

}  // namespace cgmysv::cli
