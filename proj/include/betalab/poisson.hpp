#ifndef BETALAB_POISSON_HPP
#define BETALAB_POISSON_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "betalab/rng.hpp"

namespace betalab {

namespace detail {

/// Sequential CDF inversion; exact, O(theta) expected time.
inline std::uint64_t poisson_inversion(double theta, RngStream& rng) {
  const double u = rng.uniform();
  double p = std::exp(-theta);
  double cdf = p;
  std::uint64_t k = 0;
  while (cdf < u && k < 2000) {
    ++k;
    p *= theta / static_cast<double>(k);
    cdf += p;
  }
  return k;
}

/// Hormann's transformed rejection (PTRS); exact in law for theta >= 10,
/// O(1) expected draws.  Not a normal approximation: the fluctuation
/// experiments probe exactly the sub-Gaussian tail an approximation would
/// distort.
inline std::uint64_t poisson_ptrs(double theta, RngStream& rng) {
  const double log_theta = std::log(theta);
  const double b = 0.931 + 2.53 * std::sqrt(theta);
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);

  while (true) {
    double u = rng.uniform() - 0.5;
    const double v = rng.uniform();
    const double us = 0.5 - std::abs(u);
    const double kf = std::floor((2.0 * a / us + b) * u + theta + 0.43);
    if (us >= 0.07 && v <= v_r) {
      return static_cast<std::uint64_t>(kf);
    }
    if (kf < 0.0 || (us < 0.013 && v > us)) {
      continue;
    }
    const double k = kf;
    if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
        k * log_theta - theta - std::lgamma(k + 1.0)) {
      return static_cast<std::uint64_t>(kf);
    }
  }
}

}  // namespace detail

/// Exact Poisson(theta) draw for any finite theta >= 0.
inline std::uint64_t sample_poisson(double theta, RngStream& rng) {
  if (!(theta >= 0.0) || !std::isfinite(theta)) {
    throw std::domain_error("sample_poisson: theta must be finite and >= 0");
  }
  if (theta == 0.0) return 0;
  if (theta <= 30.0) return detail::poisson_inversion(theta, rng);
  return detail::poisson_ptrs(theta, rng);
}

}  // namespace betalab

#endif
