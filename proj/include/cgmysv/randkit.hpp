// Deterministic, substream-capable random variates.
//
// Every sampler in the engine draws from a CounterEngine keyed by
// (master_seed, stream_id, substream). The engine output at position k is a
// pure function of the key and k, so a path never depends on how many
// variates another path consumed.
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "cgmysv/errors.hpp"

namespace cgmysv {

enum class Substream : std::uint32_t {
  Cir = 0,
  SeriesU = 1,
  SeriesUPrime = 2,
  SeriesE = 3,
  SeriesEPrime = 4,
  SeriesTau = 5,
};

struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_id = 0;
  Substream label = Substream::Cir;
};

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Combines a seed with extra words into a new well-mixed 64-bit seed.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a,
                                    std::uint64_t b = 0) noexcept {
  std::uint64_t h = detail::splitmix64(seed + detail::kGolden);
  h = detail::splitmix64(h ^ (a + 0x632BE59BD9B4E019ULL));
  h = detail::splitmix64(h ^ (b + 0x8CB92BA72F3D8DD7ULL));
  return h;
}

/// Counter-based 64-bit generator (SplitMix64 output function applied to
/// key + counter * golden). Satisfies UniformRandomBitGenerator.
class CounterEngine {
 public:
  using result_type = std::uint64_t;

  explicit CounterEngine(const SeedSpec& seed) noexcept
      : key_(derive_seed(seed.master_seed, seed.stream_id,
                         static_cast<std::uint64_t>(seed.label) + 1)) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    ++counter_;
    return detail::splitmix64(key_ + counter_ * detail::kGolden);
  }

  void discard(std::uint64_t n) noexcept { counter_ += n; }
  void seek(std::uint64_t position) noexcept { counter_ = position; }
  std::uint64_t position() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Stateful per-substream sampler. Value-like; move it into the thread that
/// owns the path.
class VariateStream {
 public:
  explicit VariateStream(const SeedSpec& seed) noexcept : engine_(seed) {}

  /// Uniform on the open interval (0,1).
  double uniform() noexcept {
    for (;;) {
      const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
      if (u > 0.0) return u;
    }
  }

  double exponential() noexcept { return -std::log(uniform()); }

  double normal() { return std::normal_distribution<double>{}(engine_); }

  double gamma(double shape) {
    return std::gamma_distribution<double>{shape, 1.0}(engine_);
  }

  double poisson(double mean) {
    if (mean <= 0.0) return 0.0;
    return static_cast<double>(std::poisson_distribution<std::int64_t>{mean}(engine_));
  }

  double chisq(double df) { return 2.0 * gamma(0.5 * df); }

  /// Non-central chi-square. For df > 1 uses chi2(df-1) + (Z + sqrt(nc))^2,
  /// otherwise the Poisson mixture chi2(df + 2N), N ~ Poisson(nc/2).
  double noncentral_chisq(double df, double noncentrality) {
    if (!(df > 0.0)) throw ValidationError("noncentral_chisq: df must be positive");
    if (!(noncentrality >= 0.0))
      throw ValidationError("noncentral_chisq: noncentrality must be non-negative");
    if (noncentrality == 0.0) return chisq(df);
    if (df > 1.0) {
      const double z = normal() + std::sqrt(noncentrality);
      return chisq(df - 1.0) + z * z;
    }
    const double n = poisson(0.5 * noncentrality);
    return chisq(df + 2.0 * n);
  }

  /// Jumps to the start of block k (2^32 variates per block).
  void seek_block(std::uint64_t k) noexcept { engine_.seek(k << 32); }

  CounterEngine& engine() noexcept { return engine_; }

 private:
  CounterEngine engine_;
};

inline std::vector<double> uniform(const SeedSpec& seed, std::size_t n) {
  VariateStream s(seed);
  std::vector<double> out(n);
  for (auto& x : out) x = s.uniform();
  return out;
}

inline std::vector<double> exponential(const SeedSpec& seed, std::size_t n) {
  VariateStream s(seed);
  std::vector<double> out(n);
  for (auto& x : out) x = s.exponential();
  return out;
}

/// Gamma_j = Gamma_{j-1} + E'_j with Gamma_0 = 0.
inline std::vector<double> arrivals_from_spacings(std::span<const double> spacings) {
  std::vector<double> out(spacings.size());
  double acc = 0.0;
  for (std::size_t j = 0; j < spacings.size(); ++j) {
    acc += spacings[j];
    out[j] = acc;
  }
  return out;
}

/// First n arrival times of a unit-rate Poisson process.
inline std::vector<double> poisson_arrivals(const SeedSpec& seed, std::size_t n) {
  if (n < 1) throw ValidationError("poisson_arrivals: n must be >= 1");
  const auto spacings = exponential(seed, n);
  return arrivals_from_spacings(spacings);
}

inline std::vector<double> noncentral_chisq(const SeedSpec& seed, double df,
                                            double noncentrality, std::size_t n) {
  if (!(df > 0.0)) throw ValidationError("noncentral_chisq: df must be positive");
  VariateStream s(seed);
  std::vector<double> out(n);
  for (auto& x : out) x = s.noncentral_chisq(df, noncentrality);
  return out;
}

}  // namespace cgmysv
