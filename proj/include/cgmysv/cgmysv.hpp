// CGMYSV process L_t = Z_{V_t} + rho v_t: composed characteristic function
// and series-representation path generation.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "cgmysv/cgmy.hpp"
#include "cgmysv/cir.hpp"
#include "cgmysv/matrix.hpp"
#include "cgmysv/parallel.hpp"

namespace cgmysv {

struct CgmysvParams {
  double alpha = 0.52;
  double lambda_plus = 25.46;
  double lambda_minus = 4.604;
  double kappa = 1.003;
  double eta = 0.0711;
  double zeta = 0.3443;
  double rho = -2.028;
  double v0 = 0.0064;

  StdCgmyParams cgmy() const { return {alpha, lambda_plus, lambda_minus}; }
  CirParams cir() const { return {kappa, eta, zeta, v0}; }

  void validate() const {
    cgmy().validate();
    cir().validate();
    detail::require(std::isfinite(rho), "CgmysvParams: rho must be finite");
  }

  bool operator==(const CgmysvParams&) const = default;
};

/// phi_{L_t}(u) = Phi_t(-i psi_std(u), rho u, v0). u may be complex inside the
/// strip of the standard CGMY symbol.
inline cplx cgmysv_cf(const CgmysvParams& p, cplx u, double t) {
  const cplx psi = levy_symbol(p.cgmy(), u);
  return cir_joint_cf(p.cir(), -kI * psi, p.rho * u, t, p.v0);
}

/// log E[exp(L_t)]; requires lambda_+ > 1. At t = 0 this is rho v0.
inline double cgmysv_log_mgf_one(const CgmysvParams& p, double t) {
  detail::require(p.lambda_plus > 1.0, "martingale correction needs lambda_plus > 1");
  if (t == 0.0) return p.rho * p.v0;
  const cplx val = cgmysv_cf(p, cplx{0.0, -1.0}, t);
  if (!(val.real() > 0.0) || !std::isfinite(val.real()))
    throw NumericalError("E[exp(L_t)] is not finite for these parameters");
  return std::log(val.real());
}

struct StreamSeeds {
  std::uint64_t variance_seed = 0;
  std::uint64_t series_seed = 0;

  StreamSeeds() = default;
  explicit StreamSeeds(std::uint64_t master) : variance_seed(master), series_seed(master) {}
  StreamSeeds(std::uint64_t variance, std::uint64_t series)
      : variance_seed(variance), series_seed(series) {}
};

struct PathOptions {
  bool keep_y = false;
  unsigned threads = 1;
};

struct PathSet {
  std::vector<double> times;
  Matrix v;
  Matrix L;
  std::optional<Matrix> y;
  std::uint64_t master_seed = 0;
  std::uint64_t series_seed = 0;

  std::size_t paths() const noexcept { return L.rows(); }
  std::size_t steps() const noexcept { return times.empty() ? 0 : times.size() - 1; }
};

inline std::vector<double> uniform_grid(double horizon, int steps) {
  std::vector<double> t(static_cast<std::size_t>(steps) + 1);
  for (int m = 0; m <= steps; ++m) t[m] = horizon * m / steps;
  return t;
}

/// Builds one CGMYSV path from a variance path and series draws. Y and L
/// must have steps + 1 entries.
inline void assemble_cgmysv_path(const CgmysvParams& p, double horizon, std::span<const double> v,
                                 const SeriesDraws& d, std::span<double> y, std::span<double> L) {
  const int steps = static_cast<int>(v.size()) - 1;
  const double dt = horizon / steps;
  const auto std_params = p.cgmy();
  const CgmyParams jumps{p.alpha, std_params.c_scale(), p.lambda_plus, p.lambda_minus, 0.0};
  const double drift_per_variance =
      -(std::pow(p.lambda_plus, p.alpha - 1.0) - std::pow(p.lambda_minus, p.alpha - 1.0)) /
      ((1.0 - p.alpha) *
       (std::pow(p.lambda_plus, p.alpha - 2.0) + std::pow(p.lambda_minus, p.alpha - 2.0)));

  std::vector<double> inc(static_cast<std::size_t>(steps));
  for (int m = 1; m <= steps; ++m) inc[m - 1] = drift_per_variance * v[m - 1] * dt;
  for (std::size_t j = 0; j < d.size(); ++j) {
    int k = static_cast<int>(std::ceil(d.tau[j] / dt)) - 1;
    k = std::clamp(k, 0, steps - 1);
    const double scale = jumps.c_scale * v[k];
    inc[k] += signed_jump(d, j, jumps, scale, horizon);
  }
  y[0] = 0.0;
  for (int m = 1; m <= steps; ++m) y[m] = y[m - 1] + inc[m - 1];
  for (int m = 0; m <= steps; ++m) L[m] = y[m] + p.rho * v[m];
}

/// Sample paths of (v, L) on a uniform grid with M steps over [0, T].
/// Path n uses stream id n for every substream.
inline PathSet generate_paths(const CgmysvParams& p, double horizon, int steps, int paths,
                              int terms, StreamSeeds seeds, PathOptions opts = {}) {
  p.validate();
  detail::require(horizon > 0.0, "generate_paths: horizon must be positive");
  detail::require(steps >= 1 && paths >= 1 && terms >= 1,
                  "generate_paths: M, N and J must be >= 1");

  PathSet out;
  out.times = uniform_grid(horizon, steps);
  out.v = Matrix(paths, steps + 1);
  out.L = Matrix(paths, steps + 1);
  if (opts.keep_y) out.y = Matrix(paths, steps + 1);
  out.master_seed = seeds.variance_seed;
  out.series_seed = seeds.series_seed;

  const CirStepper stepper(p.cir(), horizon / steps);
  parallel_for(static_cast<std::size_t>(paths), opts.threads, [&](std::size_t n) {
    VariateStream cir_stream({seeds.variance_seed, n, Substream::Cir});
    auto v = out.v.row(n);
    fill_variance_path(stepper, p.v0, v, cir_stream);
    const auto draws = draw_series(seeds.series_seed, n, terms, horizon);
    std::vector<double> y_local;
    std::span<double> y;
    if (out.y) {
      y = out.y->row(n);
    } else {
      y_local.resize(steps + 1);
      y = y_local;
    }
    assemble_cgmysv_path(p, horizon, v, draws, y, out.L.row(n));
  });
  return out;
}

}  // namespace cgmysv
