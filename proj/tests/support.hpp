#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace testutil {

struct Moments {
  double mean = 0, var = 0, skew = 0, kurt = 0, m6_ratio = 0;
  std::size_t n = 0;
  double se_mean() const { return std::sqrt(var / static_cast<double>(n)); }
  // Standard error of the sample variance, from the fourth moment.
  double se_var() const { return var * std::sqrt((kurt - 1.0) / static_cast<double>(n)); }
  // Delta-method standard error of the skewness of a symmetric law.
  double se_skew() const { return std::sqrt((m6_ratio - 6.0 * kurt + 9.0) / static_cast<double>(n)); }
};

inline Moments moments(std::span<const double> x) {
  Moments m;
  m.n = x.size();
  const double n = static_cast<double>(x.size());
  for (double v : x) m.mean += v;
  m.mean /= n;
  double m2 = 0, m3 = 0, m4 = 0, m6 = 0;
  for (double v : x) {
    const double d = v - m.mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
    m6 += d * d * d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  m6 /= n;
  m.m6_ratio = m6 / (m2 * m2 * m2);
  m.var = m2 * n / (n - 1.0);
  m.skew = m3 / std::pow(m2, 1.5);
  m.kurt = m4 / (m2 * m2);
  return m;
}

inline double correlation(std::span<const double> a, std::span<const double> b) {
  const auto ma = moments(a), mb = moments(b);
  double c = 0;
  for (std::size_t i = 0; i < a.size(); ++i) c += (a[i] - ma.mean) * (b[i] - mb.mean);
  c /= static_cast<double>(a.size() - 1);
  return c / std::sqrt(ma.var * mb.var);
}

}  // namespace testutil
