// CIR variance process: exact transition sampling and the joint
// characteristic function of (v_t, integral of v over [0,t]).
#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "cgmysv/errors.hpp"
#include "cgmysv/randkit.hpp"

namespace cgmysv {

using cplx = std::complex<double>;
inline constexpr cplx kI{0.0, 1.0};

/// dv = kappa (eta - v) dt + zeta sqrt(v) dW, v(0) = v0.
struct CirParams {
  double kappa = 0.0;
  double eta = 0.0;
  double zeta = 0.0;
  double v0 = 0.0;

  void validate() const {
    detail::require(kappa > 0.0 && eta > 0.0 && zeta > 0.0 && v0 > 0.0,
                    "CirParams: kappa, eta, zeta, v0 must all be positive");
  }
  /// 2 kappa eta >= zeta^2. Diagnostic only; violation is allowed.
  bool feller() const noexcept { return 2.0 * kappa * eta >= zeta * zeta; }
  double degrees_of_freedom() const noexcept { return 4.0 * kappa * eta / (zeta * zeta); }
};

struct VariancePath {
  std::vector<double> times;
  std::vector<double> values;
  std::vector<double> integrated;  // left-endpoint running integral
};

/// E[v_{t+dt} | v_t].
inline double cir_conditional_mean(const CirParams& p, double v, double dt) noexcept {
  return p.eta + (v - p.eta) * std::exp(-p.kappa * dt);
}

inline double cir_conditional_variance(const CirParams& p, double v, double dt) noexcept {
  const double e = std::exp(-p.kappa * dt);
  const double z2 = p.zeta * p.zeta;
  return v * z2 * e * (1.0 - e) / p.kappa + p.eta * z2 * (1.0 - e) * (1.0 - e) / (2.0 * p.kappa);
}

namespace detail {

/// log(1 + z) without cancellation for small |z|.
inline std::complex<double> log1p(std::complex<double> z) {
  const double x = z.real(), y = z.imag();
  return {0.5 * std::log1p(2.0 * x + x * x + y * y), std::atan2(y, 1.0 + x)};
}

}  // namespace detail

/// Precomputed constants of the exact transition over a fixed step.
class CirStepper {
 public:
  CirStepper(const CirParams& p, double dt) {
    p.validate();
    detail::require(dt > 0.0, "cir_transition: dt must be positive");
    const double decay = std::exp(-p.kappa * dt);
    c_ = 2.0 * p.kappa / ((1.0 - decay) * p.zeta * p.zeta);
    df_ = p.degrees_of_freedom();
    nc_factor_ = 2.0 * c_ * decay;
  }

  double step(double v_current, VariateStream& stream) const {
    detail::require(v_current >= 0.0, "cir_transition: current variance must be >= 0");
    return stream.noncentral_chisq(df_, nc_factor_ * v_current) / (2.0 * c_);
  }

  double c() const noexcept { return c_; }

 private:
  double c_ = 0.0;
  double df_ = 0.0;
  double nc_factor_ = 0.0;
};

inline double cir_transition(const CirParams& p, double v_current, double dt,
                             VariateStream& stream) {
  return CirStepper(p, dt).step(v_current, stream);
}

inline double cir_transition(const CirParams& p, double v_current, double dt,
                             const SeedSpec& seed) {
  VariateStream stream(seed);
  return cir_transition(p, v_current, dt, stream);
}

/// Fills values[0..M] on a uniform grid; values[0] = v0. Step m draws from
/// block m of the stream, so the rejection samplers' data-dependent
/// consumption never shifts the variates of later steps.
inline void fill_variance_path(const CirStepper& stepper, double v0,
                               std::span<double> values, VariateStream& stream) {
  values[0] = v0;
  for (std::size_t m = 1; m < values.size(); ++m) {
    stream.seek_block(m);
    values[m] = stepper.step(values[m - 1], stream);
  }
}

inline VariancePath simulate_variance_path(const CirParams& p, double horizon, int steps,
                                           const SeedSpec& seed) {
  detail::require(steps >= 1, "simulate_variance_path: steps must be >= 1");
  detail::require(horizon > 0.0, "simulate_variance_path: horizon must be positive");
  const double dt = horizon / steps;
  const CirStepper stepper(p, dt);
  VariateStream stream(seed);

  VariancePath path;
  path.times.resize(steps + 1);
  path.values.resize(steps + 1);
  path.integrated.resize(steps + 1);
  for (int m = 0; m <= steps; ++m) path.times[m] = m * dt;
  fill_variance_path(stepper, p.v0, path.values, stream);
  path.integrated[0] = 0.0;
  for (int m = 1; m <= steps; ++m) path.integrated[m] = path.integrated[m - 1] + path.values[m - 1] * dt;
  return path;
}

/// Phi_t(a, b, x) = E[exp(i a V_t + i b v_t) | v_0 = x], V_t = int_0^t v ds.
///
/// With a = -i psi this is E[exp(psi V_t + i b v_t)]. The power in A is
/// evaluated as exp(-(2 kappa eta / zeta^2) log D) with D written in terms of
/// exp(-gamma t), which keeps the logarithm on a continuous branch.
inline cplx cir_joint_cf(const CirParams& p, cplx a, cplx b, double t, double x) {
  detail::require(t > 0.0, "cir_joint_cf: t must be positive");
  const double z2 = p.zeta * p.zeta;
  const cplx gamma = std::sqrt(p.kappa * p.kappa - 2.0 * z2 * kI * a);
  const cplx kb = p.kappa - kI * b * z2;
  const cplx em = std::exp(-gamma * t);

  const cplx den = gamma * (1.0 + em) + kb * (1.0 - em);
  if (std::abs(den) < 1e-300 || !std::isfinite(den.real()) || !std::isfinite(den.imag()))
    throw NumericalError("cir_joint_cf: vanishing denominator");

  // kappa - gamma = 2 zeta^2 i a / (kappa + gamma) and
  // den / (2 gamma) = 1 + zeta^2 w, so the 1/zeta^2 factors cancel exactly.
  const cplx w = (2.0 * kI * a / (p.kappa + gamma) - kI * b) * (1.0 - em) / (2.0 * gamma);
  const cplx log_a = 2.0 * p.kappa * p.eta * t * kI * a / (p.kappa + gamma) -
                     (2.0 * p.kappa * p.eta / z2) * detail::log1p(z2 * w);
  const cplx num = kI * b * (gamma * (1.0 + em) - p.kappa * (1.0 - em)) + 2.0 * kI * a * (1.0 - em);
  return std::exp(log_a + (num / den) * x);
}

}  // namespace cgmysv
