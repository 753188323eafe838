#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "cgmysv/calibration.hpp"
#include "support.hpp"

using namespace cgmysv;

namespace {

const CgmysvParams kCallCol{0.5184, 25.4592, 4.6040, 1.0029, 0.0711, 0.3443, -2.0283, 0.006381};
const CgmysvParams kOex{1.1356, 35.2115, 7.7883, 1.9322, 0.3550, 1.2211, 1.2237, 0.0100};

OptionChain european_chain(const CgmysvParams& p, std::initializer_list<int> days, int strikes) {
  OptionChain chain{"2017-09-11", 2488.11, 0.01213, 0.01884, {}};
  for (int d : days)
    for (int i = 0; i < strikes; ++i) {
      OptionQuote q;
      q.days = d;
      q.maturity = year_fraction(d, DayCount::Trading252);
      q.strike = chain.spot * (0.9 + 0.2 * i / std::max(1, strikes - 1));
      q.price = 1.0;
      chain.quotes.push_back(q);
    }
  const auto px = fft_chain_prices(p, chain, CalibrationOptions{}.fft);
  for (std::size_t j = 0; j < px.size(); ++j) chain.quotes[j].price = px[j];
  return chain;
}

OptionChain american_chain(const CgmysvParams& p, const AmericanMcConfig& mc) {
  OptionChain chain{"2016-04-06", 918.21, 0.0044, 0.022, {}};
  for (int i = 0; i < 7; ++i) {
    OptionQuote q;
    q.days = 31;
    q.maturity = year_fraction(31, DayCount::Trading252);
    q.strike = 880.0 + 10.0 * i;
    q.right = OptionRight::Put;
    q.style = ExerciseStyle::American;
    q.price = 1.0;
    chain.quotes.push_back(q);
  }
  const auto px = lsm_chain_prices(p, chain, mc);
  for (std::size_t j = 0; j < px.size(); ++j) chain.quotes[j].price = px[j];
  return chain;
}

std::vector<double> scaled(std::vector<double> x, double f) {
  for (auto& v : x) v *= f;
  return x;
}

void expect_trace_monotone_and_bounded(const std::vector<TraceRow>& trace, const Bounds& b) {
  for (std::size_t i = 0; i < trace.size(); ++i) {
    EXPECT_TRUE(b.contains(trace[i].x)) << "row " << i;
    if (i > 0 && trace[i].start == trace[i - 1].start) {
      EXPECT_LE(trace[i].objective, trace[i - 1].objective);
    }
  }
}

}  // namespace

TEST(ErrorMetrics, HandExamples) {
  const std::vector<double> same{3.0, 4.0};
  auto r = error_metrics(same, same);
  EXPECT_EQ(r.aae, 0.0);
  EXPECT_EQ(r.ape, 0.0);
  EXPECT_EQ(r.arpe, 0.0);
  EXPECT_EQ(r.rmse, 0.0);

  const std::vector<double> m1{9.0}, p1{10.0};
  r = error_metrics(m1, p1);
  EXPECT_DOUBLE_EQ(r.aae, 1.0);
  EXPECT_DOUBLE_EQ(r.ape, 0.1);
  EXPECT_DOUBLE_EQ(r.arpe, 0.1);
  EXPECT_DOUBLE_EQ(r.rmse, 1.0);
  EXPECT_EQ(r.n, 1u);

  const std::vector<double> m2{9.0, 22.0}, p2{10.0, 20.0};
  r = error_metrics(m2, p2);
  EXPECT_DOUBLE_EQ(r.aae, 1.5);
  EXPECT_DOUBLE_EQ(r.ape, 0.1);
  EXPECT_DOUBLE_EQ(r.arpe, 0.1);
  EXPECT_DOUBLE_EQ(r.rmse, std::sqrt(2.5));
}

TEST(ErrorMetrics, PennyQuotesLeaveArpeOnly) {
  const std::vector<double> model{0.10, 10.0}, market{0.05, 10.0};
  const auto r = error_metrics(model, market);
  EXPECT_EQ(r.arpe_excluded, 1u);
  EXPECT_EQ(r.arpe, 0.0);
  EXPECT_NEAR(r.rmse, 0.05 / std::sqrt(2.0), 1e-15);
}

TEST(ErrorMetrics, Rejects) {
  const std::vector<double> a{1.0}, b{1.0, 2.0}, none;
  EXPECT_THROW(error_metrics(a, b), ValidationError);
  EXPECT_THROW(error_metrics(none, none), ValidationError);
}

TEST(ErrorMetrics, PowerMeanAndApeIdentity) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> px(0.01, 100.0), err(-3.0, 3.0);
  for (int rep = 0; rep < 200; ++rep) {
    const int n = 1 + rep % 17;
    std::vector<double> market(n), model(n);
    double mean = 0.0;
    for (int j = 0; j < n; ++j) {
      market[j] = px(gen);
      model[j] = std::max(0.0, market[j] + err(gen));
      mean += market[j] / n;
    }
    const auto r = error_metrics(model, market);
    EXPECT_GE(r.rmse, r.aae - 1e-15);
    EXPECT_NEAR(r.ape * mean, r.aae, 1e-12);
    for (double v : {r.aae, r.ape, r.arpe, r.rmse}) EXPECT_TRUE(std::isfinite(v) && v >= 0.0);
  }
}

TEST(NelderMead, Rosenbrock) {
  const Objective f = [](std::span<const double> x) {
    return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
  };
  const Bounds b{{-2.0, -2.0}, {2.0, 2.0}};
  const auto r = nelder_mead(f, {-1.2, 1.0}, b);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.x[0], 1.0, 1e-4);
  EXPECT_NEAR(r.x[1], 1.0, 1e-4);
  expect_trace_monotone_and_bounded(r.trace, b);
}

TEST(NelderMead, OptimumOnBound) {
  const Objective f = [](std::span<const double> x) { return std::pow(x[0] + 3.0, 2) + std::pow(x[1] - 0.5, 2); };
  const Bounds b{{0.0, 0.0}, {1.0, 1.0}};
  const auto r = nelder_mead(f, {0.7, 0.9}, b);
  EXPECT_NEAR(r.x[0], 0.0, 1e-6);
  EXPECT_NEAR(r.x[1], 0.5, 1e-4);
  expect_trace_monotone_and_bounded(r.trace, b);
}

TEST(NelderMead, NonFiniteObjectiveIsAvoided) {
  const Objective f = [](std::span<const double> x) {
    return x[0] < 0.2 ? std::numeric_limits<double>::quiet_NaN() : std::pow(x[0] - 0.5, 2);
  };
  const auto r = nelder_mead(f, {0.9}, {{0.0}, {1.0}});
  EXPECT_NEAR(r.x[0], 0.5, 1e-4);
}

TEST(NelderMead, BudgetExhaustionReportsBestSoFar) {
  const Objective f = [](std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return s;
  };
  SimplexOptions o;
  o.max_evaluations = 30;
  const auto r = nelder_mead(f, std::vector<double>(6, 1.0), {std::vector<double>(6, -5.0), std::vector<double>(6, 5.0)}, o);
  EXPECT_FALSE(r.converged);
  EXPECT_LT(r.objective, 6.0);
  EXPECT_EQ(r.objective, f(r.x));
}

TEST(MultiStart, BestOfStartsAndDeterministic) {
  // Two basins; the start at 0.9 sits in the shallow one.
  const Objective f = [](std::span<const double> x) {
    return std::min(std::pow(x[0] - 0.8, 2) + 0.5, std::pow(x[0] + 0.8, 2));
  };
  MultiStartOptions o;
  o.starts = 5;
  o.spread = 2.0;
  const Bounds b{{-1.0}, {1.0}};
  const auto r = multi_start(f, {0.9}, b, o);
  EXPECT_NEAR(r.x[0], -0.8, 1e-4);
  const auto again = multi_start(f, {0.9}, b, o);
  EXPECT_EQ(r.x, again.x);
  EXPECT_EQ(r.trace.size(), again.trace.size());
  expect_trace_monotone_and_bounded(r.trace, b);
  std::set<int> starts;
  for (const auto& row : r.trace) starts.insert(row.start);
  EXPECT_EQ(starts.size(), 5u);
}

TEST(Parameters, VectorRoundTripAndAlphaGap) {
  EXPECT_EQ(cgmysv_from_vector(to_vector(kCallCol)), kCallCol);
  EXPECT_NE(cgmysv_from_vector(std::vector<double>{1.0, 2, 3, 1, 0.1, 0.3, 0, 0.01}).alpha, 1.0);
  const CgmyParams c{0.7, 1.5, 20.0, 5.0, 0.0};
  const auto back = cgmy_from_vector(to_vector(c));
  EXPECT_EQ(back.alpha, c.alpha);
  EXPECT_EQ(back.c_scale, c.c_scale);
  EXPECT_TRUE(default_cgmysv_bounds().contains(to_vector(kCallCol)));
  EXPECT_TRUE(default_cgmysv_bounds().contains(to_vector(kOex)));
}

TEST(CalibrateEuropean, SingleQuoteIsDegenerateButFit) {
  auto chain = european_chain(kCallCol, {28}, 1);
  chain.quotes[0].price *= 1.05;
  CalibrationOptions o;
  o.search.starts = 1;
  o.search.simplex.max_evaluations = 400;
  const auto r = calibrate_european(chain, kCallCol, default_cgmysv_bounds(), o);
  EXPECT_TRUE(r.degenerate);
  EXPECT_LT(r.report.rmse, 1e-3);
}

TEST(CalibrateEuropean, SyntheticRoundTripImproves) {
  const auto chain = european_chain(kCallCol, {28, 84}, 7);
  const auto start = cgmysv_from_vector(scaled(to_vector(kCallCol), 1.2));
  CalibrationOptions o;
  o.search.starts = 1;
  o.search.simplex.max_evaluations = 1200;
  const double initial = european_objective(start, chain, o.fft);
  const auto r = calibrate_european(chain, start, default_cgmysv_bounds(), o);
  EXPECT_FALSE(r.degenerate);
  EXPECT_LT(r.report.rmse, 0.05 * initial);
  EXPECT_NEAR(r.report.rmse, r.trace.back().objective, 1e-12);
  expect_trace_monotone_and_bounded(r.trace, default_cgmysv_bounds());
  EXPECT_GT(r.trace.size(), 10u);
}

TEST(CalibrateEuropean, TruthIsAFixedPoint) {
  const auto chain = european_chain(kCallCol, {28}, 5);
  EXPECT_LT(european_objective(kCallCol, chain, CalibrationOptions{}.fft), 1e-9);
}

TEST(CalibrateEuropean, Rejects) {
  auto chain = european_chain(kCallCol, {28}, 3);
  auto bad = kCallCol;
  bad.lambda_plus = 500.0;
  EXPECT_THROW(calibrate_european(chain, bad), ValidationError);
  chain.quotes[1].style = ExerciseStyle::American;
  EXPECT_THROW(calibrate_european(chain, kCallCol), ValidationError);
  chain.quotes.clear();
  EXPECT_THROW(calibrate_european(chain, kCallCol), ValidationError);
}

TEST(CalibrateEuropean, OutOfStripParametersArePenalized) {
  const auto chain = european_chain(kCallCol, {28}, 3);
  auto p = kCallCol;
  p.lambda_plus = 0.5;
  EXPECT_EQ(european_objective(p, chain, {}), kPenalty);
}

TEST(AmericanObjective, DeterministicUnderFixedSeed) {
  AmericanMcConfig mc;
  mc.paths = 1000;
  mc.terms = 256;
  mc.master_seed = 3;
  const auto chain = american_chain(kOex, mc);
  const double a = american_objective(kOex, chain, mc);
  const double b = american_objective(kOex, chain, mc);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, 0.0);
  mc.master_seed = 4;
  EXPECT_GT(american_objective(kOex, chain, mc), 0.0);
}

TEST(AmericanObjective, ContinuousAlongSegment) {
  AmericanMcConfig truth_mc;
  truth_mc.paths = 2000;
  truth_mc.terms = 256;
  truth_mc.master_seed = 99;
  const auto chain = american_chain(kOex, truth_mc);

  AmericanMcConfig mc = truth_mc;
  std::vector<double> floor;
  for (std::uint64_t s = 1; s <= 5; ++s) {
    mc.master_seed = s;
    floor.push_back(american_objective(kOex, chain, mc));
  }
  const auto m = testutil::moments(floor);
  const double noise = std::sqrt(m.var);

  const auto a = to_vector(kOex);
  const auto b = scaled(a, 1.1);
  auto max_curvature = [&](bool common_seed) {
    double prev = 0.0, prev_step = 0.0, worst = 0.0;
    for (int k = 0; k < 50; ++k) {
      std::vector<double> x(a.size());
      for (std::size_t i = 0; i < x.size(); ++i) x[i] = a[i] + (b[i] - a[i]) * k / 49.0;
      mc.master_seed = common_seed ? 1 : 1000 + static_cast<std::uint64_t>(k);
      const double f = american_objective(cgmysv_from_vector(x), chain, mc);
      if (k > 1) worst = std::max(worst, std::abs((f - prev) - prev_step));
      if (k > 0) prev_step = f - prev;
      prev = f;
    }
    return worst;
  };
  const double crn = max_curvature(true);
  EXPECT_LT(crn, noise);
  EXPECT_GT(max_curvature(false), crn);
}

TEST(CalibrateAmerican, SyntheticRoundTripWithinNoiseFloor) {
  AmericanMcConfig truth_mc;
  truth_mc.paths = 2000;
  truth_mc.terms = 256;
  truth_mc.master_seed = 99;
  const auto chain = american_chain(kOex, truth_mc);

  AmericanMcConfig mc = truth_mc;
  double floor = 0.0;
  for (std::uint64_t s = 1; s <= 5; ++s) {
    mc.master_seed = s;
    floor += american_objective(kOex, chain, mc) / 5.0;
  }
  mc.master_seed = 1;
  CalibrationOptions o;
  o.search.starts = 1;
  o.search.simplex.max_evaluations = 600;
  const auto start = cgmysv_from_vector(scaled(to_vector(kOex), 1.2));
  const auto r = calibrate_american(chain, start, mc, default_cgmysv_bounds(), o);
  EXPECT_LT(r.report.rmse, 2.0 * floor);
  expect_trace_monotone_and_bounded(r.trace, default_cgmysv_bounds());
}

TEST(CalibrateAmerican, CgmyBaselineFourParameters) {
  const CgmyParams truth{0.6, 0.5, 20.0, 8.0, 0.0};
  AmericanMcConfig mc;
  mc.paths = 1000;
  mc.terms = 256;
  mc.master_seed = 7;
  OptionChain chain = american_chain(kOex, mc);
  const auto px = lsm_chain_prices(truth, chain, mc);
  for (std::size_t j = 0; j < px.size(); ++j) chain.quotes[j].price = px[j];
  EXPECT_EQ(american_objective(truth, chain, mc), 0.0);

  CalibrationOptions o;
  o.search.starts = 1;
  o.search.simplex.max_evaluations = 300;
  const CgmyParams start{0.5, 0.6, 24.0, 9.0, 0.0};
  const double initial = american_objective(start, chain, mc);
  const auto r = calibrate_american(chain, start, mc, default_cgmy_bounds(), o);
  EXPECT_LT(r.report.rmse, 0.25 * initial);
  EXPECT_EQ(r.trace.front().x.size(), 4u);
  expect_trace_monotone_and_bounded(r.trace, default_cgmy_bounds());
}

TEST(CalibrateAmerican, RejectsEuropeanQuotesAndBadMc) {
  auto chain = european_chain(kCallCol, {28}, 2);
  AmericanMcConfig mc;
  EXPECT_THROW(calibrate_american(chain, kCallCol, mc), ValidationError);
  for (auto& q : chain.quotes) q.style = ExerciseStyle::American;
  mc.paths = 1;
  EXPECT_THROW(calibrate_american(chain, kCallCol, mc), ValidationError);
}

namespace {

const char* kHeader = "quote_date,expiry_date,strike,right,style,price,spot,rate,div_yield\n";

}  // namespace

TEST(ChainCsv, Parses) {
  std::istringstream in(std::string(kHeader) +
                        "2016-04-06,2016-05-07,910,P,A,13.95,918.21,0.0044,0.022\n"
                        "2016-04-06,2016-05-07,920,C,E,12.5,918.21,0.0044,0.022\n"
                        "\n");
  const auto chain = parse_chain(in, DayCount::Calendar365);
  ASSERT_EQ(chain.quotes.size(), 2u);
  EXPECT_EQ(chain.quote_date, "2016-04-06");
  EXPECT_EQ(chain.spot, 918.21);
  EXPECT_EQ(chain.q, 0.022);
  EXPECT_EQ(chain.quotes[0].days, 31.0);
  EXPECT_DOUBLE_EQ(chain.quotes[0].maturity, 31.0 / 365.0);
  EXPECT_EQ(chain.quotes[0].right, OptionRight::Put);
  EXPECT_EQ(chain.quotes[0].style, ExerciseStyle::American);
  EXPECT_EQ(chain.quotes[1].right, OptionRight::Call);
  EXPECT_EQ(chain.select(ExerciseStyle::American, OptionRight::Put).quotes.size(), 1u);
  EXPECT_EQ(chain.select(ExerciseStyle::European, OptionRight::Put).quotes.size(), 0u);
}

TEST(ChainCsv, ColumnOrderIsFree) {
  std::istringstream in("price,strike,right,style,quote_date,expiry_date,spot,rate,div_yield\n"
                        "5,100,C,E,2020-01-01,2020-02-01,101,0.01,0\n");
  const auto chain = parse_chain(in);
  EXPECT_EQ(chain.quotes[0].price, 5.0);
  EXPECT_DOUBLE_EQ(chain.quotes[0].maturity, 31.0 / 252.0);
}

TEST(ChainCsv, MalformedRowsReportLineNumber) {
  const std::vector<std::string> bad{
      "2016-04-06,2016-05-07,910,X,A,13.95,918.21,0.0044,0.022\n",
      "2016-04-06,2016-05-07,910,P,Q,13.95,918.21,0.0044,0.022\n",
      "2016-04-06,2016-02-30,910,P,A,13.95,918.21,0.0044,0.022\n",
      "2016-04-06,2016-04-06,910,P,A,13.95,918.21,0.0044,0.022\n",
      "2016-04-06,2016-05-07,abc,P,A,13.95,918.21,0.0044,0.022\n",
      "2016-04-06,2016-05-07,910,P,A,-1,918.21,0.0044,0.022\n",
      "2016-04-06,2016-05-07,910,P,A,13.95\n",
      "2016-04-06,2016-05-07,910,P,A,13.95,919,0.0044,0.022\n",
  };
  for (const auto& row : bad) {
    std::istringstream in(std::string(kHeader) + "2016-04-06,2016-05-07,900,P,A,10,918.21,0.0044,0.022\n" + row);
    try {
      parse_chain(in);
      ADD_FAILURE() << "accepted: " << row;
    } catch (const ValidationError& e) {
      EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    }
  }
}

TEST(ChainCsv, HeaderAndEmptyFile) {
  std::istringstream empty("");
  EXPECT_THROW(parse_chain(empty), ValidationError);
  std::istringstream header_only(kHeader);
  EXPECT_THROW(parse_chain(header_only), ValidationError);
  std::istringstream missing("quote_date,expiry_date,strike,right,style,price,spot,rate\n");
  EXPECT_THROW(parse_chain(missing), ValidationError);
  EXPECT_THROW(read_chain_csv("/nonexistent/chain.csv"), IoError);
}
