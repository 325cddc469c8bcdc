#ifndef BETALAB_LEVY_HPP
#define BETALAB_LEVY_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "betalab/alpha.hpp"
#include "betalab/errors.hpp"
#include "betalab/rates.hpp"
#include "betalab/rng.hpp"
#include "betalab/stable.hpp"

namespace betalab {

/// Y below this level is treated as extinct.  Y is spectrally positive, so
/// it crosses 0 continuously and the threshold bias is one grid cell.
inline constexpr double kAbsorptionThreshold = 1e-9;

/// Grid-sampled trajectory of the spectrally positive stable process
/// started at 1.  Grid marginals are exact in law (stable increments are
/// sampled exactly); everything between grid points is interpolation.
///
/// The grid is always filled out to the horizon -- the underlying Levy
/// process is defined on all of R -- and absorbed_at marks the first index
/// at or below the absorption threshold.  Time-change consumers never look
/// past absorbed_at; the raw-path integral over [0,1] uses the full grid.
struct LevyPath {
  Alpha alpha;
  double step = 0.0;
  std::vector<double> values;  ///< Y at grid times 0, h, 2h, ...; values[0] = 1
  std::optional<std::size_t> absorbed_at;

  double horizon() const {
    return step * static_cast<double>(values.size() - 1);
  }
};

/// Trapezoid cumulatives of 1/Y and Y^{-alpha}, the two integrands behind
/// the Lamperti clock U and the coupled clock R.  Truncated at absorption:
/// the cell entering the sub-threshold point is excluded, since 1/Y there
/// is dominated by the clamped threshold rather than the path.
struct TimeChangeCache {
  std::vector<double> cumulative_inverse;
  std::vector<double> cumulative_neg_alpha;

  std::size_t last_index() const { return cumulative_inverse.size() - 1; }
};

inline std::optional<std::size_t> detect_absorption(
    const std::vector<double>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] <= kAbsorptionThreshold) return i;
  }
  return std::nullopt;
}

/// Wraps hand-built grid values as a path (used by tests for synthetic
/// paths); detects absorption by scan.
inline LevyPath make_path(Alpha alpha, double step,
                          std::vector<double> values) {
  if (!(step > 0.0) || values.size() < 2) {
    throw std::domain_error("make_path: need step > 0 and >= 2 grid points");
  }
  LevyPath path{alpha, step, std::move(values), std::nullopt};
  path.absorbed_at = detect_absorption(path.values);
  return path;
}

/// Path of ceil(horizon/step) exact-in-law stable increments from Y(0)=1.
inline LevyPath simulate_path(Alpha alpha, double horizon, double step,
                              RngStream& rng) {
  if (!(step > 0.0) || !(horizon > 0.0) || step > horizon) {
    throw std::domain_error("simulate_path: need 0 < step <= horizon");
  }
  const auto n_steps =
      static_cast<std::size_t>(std::ceil(horizon / step - 1e-12));
  if (n_steps > 50'000'000) {
    throw std::domain_error("simulate_path: grid exceeds 5e7 points");
  }
  LevyPath path{alpha, step, {}, std::nullopt};
  path.values.reserve(n_steps + 1);
  path.values.push_back(1.0);
  const double scale = std::pow(step, 1.0 / alpha.value());
  double y = 1.0;
  for (std::size_t i = 0; i < n_steps; ++i) {
    y += scale * sample_standard_stable(alpha, rng);
    path.values.push_back(y);
    if (!path.absorbed_at && y <= kAbsorptionThreshold) {
      path.absorbed_at = path.values.size() - 1;
    }
  }
  return path;
}

/// Grid time of the first value at or below the absorption threshold,
/// absent if the path never gets there within its horizon.
inline std::optional<double> hitting_time(const LevyPath& path) {
  const auto idx = detect_absorption(path.values);
  if (!idx) return std::nullopt;
  return static_cast<double>(*idx) * path.step;
}

inline TimeChangeCache make_time_change_cache(const LevyPath& path) {
  // Valid grid points stop just before absorption.
  const std::size_t last =
      path.absorbed_at ? (*path.absorbed_at > 0 ? *path.absorbed_at - 1 : 0)
                       : path.values.size() - 1;
  const double a = path.alpha.value();
  const double h = path.step;
  TimeChangeCache cache;
  cache.cumulative_inverse.resize(last + 1);
  cache.cumulative_neg_alpha.resize(last + 1);
  cache.cumulative_inverse[0] = 0.0;
  cache.cumulative_neg_alpha[0] = 0.0;
  double prev_inv = 1.0 / path.values[0];
  double prev_na = std::pow(path.values[0], -a);
  for (std::size_t i = 1; i <= last; ++i) {
    const double y = path.values[i];
    const double inv = 1.0 / y;
    const double na = std::pow(y, -a);
    cache.cumulative_inverse[i] =
        cache.cumulative_inverse[i - 1] + 0.5 * h * (prev_inv + inv);
    cache.cumulative_neg_alpha[i] =
        cache.cumulative_neg_alpha[i - 1] + 0.5 * h * (prev_na + na);
    prev_inv = inv;
    prev_na = na;
  }
  return cache;
}

namespace detail {

/// Linear interpolation of a cumulative at a fractional grid position.
inline double interp_at(const std::vector<double>& cum, double pos) {
  if (pos <= 0.0) return cum.front();
  const auto max_pos = static_cast<double>(cum.size() - 1);
  if (pos >= max_pos) return cum.back();
  const auto i = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(i);
  return cum[i] + frac * (cum[i + 1] - cum[i]);
}

/// Inverse lookup: smallest fractional grid position where the strictly
/// increasing cumulative reaches `target`.
inline double inverse_position(const std::vector<double>& cum, double target) {
  const auto it = std::lower_bound(cum.begin(), cum.end(), target);
  const auto j = static_cast<std::size_t>(it - cum.begin());
  if (j == 0) return 0.0;
  const double lo = cum[j - 1], hi = cum[j];
  const double frac = hi > lo ? (target - lo) / (hi - lo) : 0.0;
  return static_cast<double>(j - 1) + frac;
}

[[noreturn]] inline void unreachable_time(const LevyPath& path,
                                          const char* what) {
  if (path.absorbed_at) {
    throw absorbed_error(std::string(what) +
                         ": time beyond absorption, Z = 0 there");
  }
  throw horizon_error(std::string(what) + ": grid ends before requested time");
}

}  // namespace detail

/// Lamperti clock inverse U(t) = inf{ s : Int_0^s du/Y(u) >= t }.
inline double lamperti_U(const LevyPath& path, const TimeChangeCache& cache,
                         double t) {
  if (!(t >= 0.0)) throw std::domain_error("lamperti_U: t must be >= 0");
  if (t > cache.cumulative_inverse.back()) {
    detail::unreachable_time(path, "lamperti_U");
  }
  return path.step * detail::inverse_position(cache.cumulative_inverse, t);
}

/// Coupled clock R(t) = C_alpha Int_0^{U(t)} Y(u)^{-alpha} du.
inline double compute_R(const LevyPath& path, const TimeChangeCache& cache,
                        double t) {
  const double u = lamperti_U(path, cache, t);
  const double c_alpha = detail::c_alpha_of(path.alpha.value());
  return c_alpha *
         detail::interp_at(cache.cumulative_neg_alpha, u / path.step);
}

/// Generalized inverse R^{-1}(t) = inf{ s : R(s) >= t }.  Solved without
/// bisection: R(s) >= t iff U(s) >= u* where the Y^{-alpha} cumulative at
/// u* equals t/C_alpha, and then inf{s : U(s) >= u*} is the 1/Y cumulative
/// at u*.  For an absorbed path R blows up at absorption, so a level past
/// the grid's resolution is pinned to the absorption clock time (within
/// one grid cell); an unabsorbed path that ends too early is a horizon
/// error, never a silent truncation.
inline double r_inverse(const LevyPath& path, const TimeChangeCache& cache,
                        double t) {
  if (!(t >= 0.0)) throw std::domain_error("r_inverse: t must be >= 0");
  const double c_alpha = detail::c_alpha_of(path.alpha.value());
  const double target = t / c_alpha;
  if (target > cache.cumulative_neg_alpha.back()) {
    if (path.absorbed_at) return cache.cumulative_inverse.back();
    throw horizon_error("r_inverse: grid ends before level t is reached");
  }
  const double pos =
      detail::inverse_position(cache.cumulative_neg_alpha, target);
  return detail::interp_at(cache.cumulative_inverse, pos);
}

/// Trapezoid integral of Y0 = Y - 1 over [0,1]; the path functional whose
/// small-time rescalings drive every fluctuation limit here.
inline double integral_X(const LevyPath& path) {
  const double h = path.step;
  const auto n = static_cast<std::size_t>(std::llround(1.0 / h));
  if (path.horizon() < 1.0 - 1e-12 || n + 1 > path.values.size()) {
    throw std::domain_error("integral_X: path horizon must be >= 1");
  }
  double sum = 0.5 * (path.values[0] - 1.0);
  for (std::size_t i = 1; i < n; ++i) sum += path.values[i] - 1.0;
  sum += 0.5 * (path.values[n] - 1.0);
  return sum * h;
}

/// CSBP path Z(t) = Y(U(t)) at the requested times; 0 from absorption on.
inline std::vector<double> csbp_path(const LevyPath& path,
                                     const TimeChangeCache& cache,
                                     const std::vector<double>& out_times) {
  std::vector<double> z;
  z.reserve(out_times.size());
  const double reach = cache.cumulative_inverse.back();
  for (double t : out_times) {
    if (!(t >= 0.0)) throw std::domain_error("csbp_path: times must be >= 0");
    if (t > reach) {
      if (!path.absorbed_at) {
        throw horizon_error("csbp_path: grid ends before requested time");
      }
      z.push_back(0.0);
      continue;
    }
    const double pos =
        detail::inverse_position(cache.cumulative_inverse, t);
    // left grid point, consistent with cadlag evaluation
    const auto i = static_cast<std::size_t>(pos);
    z.push_back(path.values[i]);
  }
  return z;
}

/// Conditional closed-form functionals of Z(t) given the simulated past,
/// evaluated at the first grid point where the mass drops below a macro
/// cutoff (or at t if the path stays above it).
struct CsbpConditional {
  double extinction_probability = 0.0;  ///< P(Z(t) = 0 | path)
  double laplace_value = 0.0;           ///< E[e^{-lambda Z(t)} | path]
  bool exhausted = false;
};

/// Rao-Blackwellized marginal estimator: simulate the Lamperti-time-changed
/// grid path while the mass stays above `cutoff`; at the first grid point
/// below it, substitute the exact conditional laws of the remaining CSBP
/// (extinction by the leftover clock time, and the Laplace flow).  The
/// stopping rule only looks at the past, so the substitution is exact in
/// law; the plain indicator estimator clocks deaths at the truncated
/// absorption cell and systematically undercounts the final-cell clock
/// time, a bias the conditional form removes.
inline CsbpConditional csbp_conditional_at(Alpha alpha, double t,
                                           double lambda, double step,
                                           RngStream& rng,
                                           double cutoff = 0.05,
                                           std::size_t max_steps =
                                               10'000'000) {
  if (!(t > 0.0) || !(step > 0.0) || !(lambda > 0.0) || !(cutoff > 0.0)) {
    throw std::domain_error(
        "csbp_conditional_at: need positive t, step, lambda, cutoff");
  }
  alpha.require_cdi("csbp_conditional_at");
  const double a = alpha.value();
  const double scale = std::pow(step, 1.0 / a);
  double y_prev = 1.0;
  double clock = 0.0;
  for (std::size_t i = 0; i < max_steps; ++i) {
    const double y = y_prev + scale * sample_standard_stable(alpha, rng);
    if (y <= kAbsorptionThreshold) {
      // already dead before clock t
      return CsbpConditional{1.0, 1.0, false};
    }
    const double cell = 0.5 * step * (1.0 / y_prev + 1.0 / y);
    if (clock + cell >= t) {
      return CsbpConditional{0.0, std::exp(-lambda * y_prev), false};
    }
    clock += cell;
    if (y <= cutoff) {
      const double rem = t - clock;
      // remaining process is a CSBP from mass y; closed forms are exact
      const double u_inf = std::pow((a - 1.0) * rem, -1.0 / (a - 1.0));
      const double u_lam =
          std::pow(std::pow(lambda, 1.0 - a) + (a - 1.0) * rem,
                   -1.0 / (a - 1.0));
      return CsbpConditional{std::exp(-y * u_inf), std::exp(-y * u_lam),
                             false};
    }
    y_prev = y;
  }
  return CsbpConditional{0.0, 0.0, true};
}

/// Outcome of a streaming CSBP marginal draw.
struct CsbpMarginal {
  double z = 0.0;
  bool extinct = false;
  bool exhausted = false;
};

/// Z(t) by simulating Y step by step and accumulating the Lamperti clock,
/// without storing the path.  O(1) memory; used for large marginal
/// experiments where whole paths would be wasteful.
inline CsbpMarginal csbp_marginal_at(Alpha alpha, double t, double step,
                                     RngStream& rng,
                                     std::size_t max_steps = 10'000'000) {
  if (!(t > 0.0) || !(step > 0.0)) {
    throw std::domain_error("csbp_marginal_at: need t > 0 and step > 0");
  }
  const double scale = std::pow(step, 1.0 / alpha.value());
  double y_prev = 1.0;
  double clock = 0.0;
  for (std::size_t i = 0; i < max_steps; ++i) {
    const double y = y_prev + scale * sample_standard_stable(alpha, rng);
    if (y <= kAbsorptionThreshold) {
      return CsbpMarginal{0.0, true, false};
    }
    const double cell = 0.5 * step * (1.0 / y_prev + 1.0 / y);
    if (clock + cell >= t) {
      return CsbpMarginal{y_prev, false, false};
    }
    clock += cell;
    y_prev = y;
  }
  return CsbpMarginal{0.0, false, true};
}

}  // namespace betalab

#endif
