#ifndef BETALAB_RATES_HPP
#define BETALAB_RATES_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "betalab/alpha.hpp"
#include "betalab/errors.hpp"

namespace betalab {

/// Named constants of the Beta(2-alpha, alpha) coalescent, all routed
/// through log-gamma.
struct CoalescentConstants {
  Alpha alpha;
  double gamma_alpha;  ///< Gamma(alpha)
  double c_alpha;      ///< alpha (alpha-1) Gamma(alpha)
  double d_alpha;      ///< (alpha Gamma(alpha))^{1/(alpha(alpha-1))} (alpha-1)^{-1/alpha}
  double speed_const;  ///< (alpha Gamma(alpha))^{1/(alpha-1)}
  double x_scale;      ///< (alpha+1)^{-1/alpha}
};

/// Aggregate merger law at a fixed block count: total event rate and the
/// distribution of the merger size k in {2, ..., b}.
struct MergerLaw {
  std::uint64_t b = 0;
  double total_rate = 0.0;
  std::vector<double> pmf;  ///< pmf[k - 2] = P(merger size == k)

  double prob(std::uint64_t k) const {
    if (k < 2 || k > b) return 0.0;
    return pmf[k - 2];
  }
};

namespace detail {

inline double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

/// e^{-u} - 1 + u, evaluated without cancellation for small u.
inline double expm1_plus(double u) {
  if (u < 1e-4) {
    // Taylor: u^2/2 - u^3/6 + u^4/24 - u^5/120
    return u * u * (0.5 + u * (-1.0 / 6.0 + u * (1.0 / 24.0 - u / 120.0)));
  }
  return std::expm1(-u) + u;
}

/// log(e^{-u} - 1 + u); the direct form underflows to 0 for u below
/// ~1e-150, which turns 0 * exp(large) into NaN in the psi integrand.
inline double log_expm1_plus(double u) {
  if (u < 1e-4) {
    return 2.0 * std::log(u) +
           std::log(0.5 + u * (-1.0 / 6.0 + u * (1.0 / 24.0 - u / 120.0)));
  }
  return std::log(std::expm1(-u) + u);
}

/// Ratio q_{k+1}/q_k of the unnormalized merger-size masses
/// q_k = C(b,k) lambda_{b,k}.  Avoids per-k gamma evaluations.
inline double merger_mass_ratio(double b, double k, double alpha) {
  return ((b - k) / (k + 1.0)) * ((k - alpha) / (b - k - 1.0 + alpha));
}

}  // namespace detail

/// Density of Beta(2-alpha, alpha) at x in (0,1).
inline double beta_density(double x, Alpha alpha) {
  if (!(x > 0.0) || !(x < 1.0)) {
    throw std::domain_error("beta_density: x must lie in (0,1)");
  }
  const double a = alpha.value();
  const double log_norm = std::lgamma(a) + std::lgamma(2.0 - a);
  return std::exp((1.0 - a) * std::log(x) + (a - 1.0) * std::log1p(-x) -
                  log_norm);
}

/// Rate at which any particular set of k of the current b blocks merges:
/// lambda_{b,k} = B(k-alpha, b-k+alpha) / B(2-alpha, alpha), evaluated in
/// log-gamma space.
inline double lambda_bk(std::uint64_t b, std::uint64_t k, Alpha alpha) {
  if (b < 2 || k < 2 || k > b) {
    throw std::domain_error("lambda_bk: need 2 <= k <= b");
  }
  const double a = alpha.value();
  const double bd = static_cast<double>(b);
  const double kd = static_cast<double>(k);
  return std::exp(std::lgamma(kd - a) + std::lgamma(bd - kd + a) -
                  std::lgamma(bd) - std::lgamma(2.0 - a) - std::lgamma(a));
}

/// Total merge rate with b blocks, Sum_k C(b,k) lambda_{b,k}.  Closed form
/// Gamma(b-1+alpha) / (Gamma(b-1) alpha Gamma(alpha)); the equivalence with
/// the direct sum is enforced by tests.
inline double total_merge_rate(std::uint64_t b, Alpha alpha) {
  if (b < 2) throw std::domain_error("total_merge_rate: need b >= 2");
  const double a = alpha.value();
  const double bd = static_cast<double>(b);
  return std::exp(std::lgamma(bd - 1.0 + a) - std::lgamma(bd - 1.0) -
                  std::log(a) - std::lgamma(a));
}

/// Full merger-size law at block count b, built with the ratio recurrence
/// from q_2 upward.  O(b) time and memory.
inline MergerLaw merger_law(std::uint64_t b, Alpha alpha) {
  if (b < 2) throw std::domain_error("merger_law: need b >= 2");
  const double a = alpha.value();
  const double bd = static_cast<double>(b);

  MergerLaw law;
  law.b = b;
  law.pmf.resize(b - 1);

  // q_2 = C(b,2) lambda_{b,2}, in log space so b ~ 1e6 cannot overflow.
  double q = std::exp(std::log(bd) + std::log(bd - 1.0) - std::log(2.0) +
                      std::lgamma(2.0 - a) + std::lgamma(bd - 2.0 + a) -
                      std::lgamma(bd) - std::lgamma(2.0 - a) -
                      std::lgamma(a));
  double sum = 0.0, comp = 0.0;  // Kahan
  for (std::uint64_t k = 2; k <= b; ++k) {
    law.pmf[k - 2] = q;
    const double y = q - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
    if (k < b) q *= detail::merger_mass_ratio(bd, static_cast<double>(k), a);
  }
  law.total_rate = sum;
  for (double& p : law.pmf) p /= sum;
  return law;
}

/// Branching mechanism psi(q) = Int_0^1 (e^{-qx} - 1 + qx) x^{-2} Lambda(dx)
/// for Lambda = Beta(2-alpha, alpha).  Tanh-sinh quadrature absorbs the
/// algebraic endpoint singularities; the interval is split at 1/q so the
/// integrand's transition scale sits at a panel boundary.
inline double psi(double q, Alpha alpha) {
  if (!(q >= 0.0)) throw std::domain_error("psi: q must be >= 0");
  if (q == 0.0) return 0.0;
  const double a = alpha.value();
  const double log_norm = std::lgamma(a) + std::lgamma(2.0 - a);

  auto integrand = [&](double x) {
    // (e^{-qx} - 1 + qx) x^{-1-alpha} (1-x)^{alpha-1} / (G(a)G(2-a)),
    // assembled in log space so the tiny-x evaluations near the endpoint
    // cannot underflow against the diverging power factor
    return std::exp(detail::log_expm1_plus(q * x) +
                    (-1.0 - a) * std::log(x) + (a - 1.0) * std::log1p(-x) -
                    log_norm);
  };

  static thread_local boost::math::quadrature::tanh_sinh<double> integrator;
  const double tol = 1e-9;
  if (q > 1.0) {
    const double xm = 1.0 / q;
    return integrator.integrate(integrand, 0.0, xm, tol) +
           integrator.integrate(integrand, xm, 1.0, tol);
  }
  return integrator.integrate(integrand, 0.0, 1.0, tol);
}

namespace detail {

/// Matching cutoff for the analytic 1/psi tail: beyond this level the
/// integrand is replaced by its asymptote C_alpha q^{-alpha}.
constexpr double kSpeedTailCutoff = 1e6;

inline double c_alpha_of(double a) {
  return a * (a - 1.0) * std::exp(std::lgamma(a));
}

}  // namespace detail

/// Time for the block count to come down to level s:
/// Int_s^inf dq / psi(q).  Numeric on [s, 1e6], analytic asymptotic tail
/// C_alpha q^{-alpha} beyond.  Only defined in the CDI regime.
inline double time_to_level(double s, Alpha alpha) {
  alpha.require_cdi("time_to_level");
  if (!(s > 0.0)) throw std::domain_error("time_to_level: s must be > 0");
  const double a = alpha.value();
  const double c_alpha = detail::c_alpha_of(a);
  const double qstar = detail::kSpeedTailCutoff;

  auto tail = [&](double from) {
    // Int_from^inf C_alpha q^{-alpha} dq
    return c_alpha * std::pow(from, 1.0 - a) / (a - 1.0);
  };
  if (s >= qstar) return tail(s);

  // log substitution keeps the panel count modest across many decades
  auto f = [&](double u) {
    const double q = std::exp(u);
    return q / psi(q, alpha);
  };
  using boost::math::quadrature::gauss_kronrod;
  const double numeric = gauss_kronrod<double, 31>::integrate(
      f, std::log(s), std::log(qstar), 12, 1e-9);
  return numeric + tail(qstar);
}

/// Speed of coming down from infinity: the level s with
/// Int_s^inf dq/psi(q) = t, solved by bisection (analytic inversion when
/// the solution lies in the asymptotic tail).
inline double v_psi(double t, Alpha alpha) {
  alpha.require_cdi("v_psi");
  if (!(t > 0.0)) throw std::domain_error("v_psi: t must be > 0");
  const double a = alpha.value();
  const double qstar = detail::kSpeedTailCutoff;

  const double t_star = time_to_level(qstar, alpha);
  if (t <= t_star) {
    // solution is beyond the cutoff, where the tail is analytic
    const double c_alpha = detail::c_alpha_of(a);
    return std::pow(c_alpha / ((a - 1.0) * t), 1.0 / (a - 1.0));
  }

  double hi = qstar;
  double lo = hi;
  while (time_to_level(lo, alpha) <= t) {
    lo *= 0.25;
    if (lo < 1e-12) {
      throw std::domain_error("v_psi: t too large, level below bracket");
    }
  }
  // bisection in log space on the monotone map s -> time_to_level(s)
  double llo = std::log(lo), lhi = std::log(hi);
  for (int i = 0; i < 80 && lhi - llo > 1e-12; ++i) {
    const double mid = 0.5 * (llo + lhi);
    const double tm = time_to_level(std::exp(mid), alpha);
    if (tm > t) {
      llo = mid;
    } else {
      lhi = mid;
    }
  }
  return std::exp(0.5 * (llo + lhi));
}

/// Log-log growth exponent of psi over q in [1e3, 1e6].  Diagnostic only:
/// it approaches alpha in the CDI regime but any finite-window estimate is
/// biased upward near the alpha = 1 boundary.
inline double psi_growth_exponent(Alpha alpha) {
  const double q_lo = 1e3, q_hi = 1e6;
  return (std::log(psi(q_hi, alpha)) - std::log(psi(q_lo, alpha))) /
         (std::log(q_hi) - std::log(q_lo));
}

/// Whether the Beta(2-alpha, alpha) coalescent comes down from infinity,
/// i.e. Int^inf dq/psi(q) < inf.  Equivalent to alpha in (1,2); the
/// boundary alpha = 1 diverges (psi(q) ~ q log q) and is excluded.
inline bool comes_down_from_infinity(Alpha alpha) {
  return alpha.in_cdi_regime();
}

/// All named constants for the CDI regime.
inline CoalescentConstants constants(Alpha alpha) {
  alpha.require_cdi("constants");
  const double a = alpha.value();
  const double gamma_alpha = std::exp(std::lgamma(a));
  const double aga = a * gamma_alpha;
  return CoalescentConstants{
      alpha,
      gamma_alpha,
      a * (a - 1.0) * gamma_alpha,
      std::pow(aga, 1.0 / (a * (a - 1.0))) * std::pow(a - 1.0, -1.0 / a),
      std::pow(aga, 1.0 / (a - 1.0)),
      std::pow(a + 1.0, -1.0 / a)};
}

/// CSBP Laplace flow u_t(lambda) for the branching mechanism u^alpha:
/// closed-form solution of du/dt = u^alpha, u_0 = lambda.
inline double u_flow(double t, double lambda, Alpha alpha) {
  alpha.require_cdi("u_flow");
  if (!(lambda > 0.0)) throw std::domain_error("u_flow: lambda must be > 0");
  if (!(t >= 0.0)) throw std::domain_error("u_flow: t must be >= 0");
  const double a = alpha.value();
  return std::pow(std::pow(lambda, 1.0 - a) + (a - 1.0) * t,
                  -1.0 / (a - 1.0));
}

}  // namespace betalab

#endif
