#ifndef BETALAB_COALESCENT_HPP
#define BETALAB_COALESCENT_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "betalab/alpha.hpp"
#include "betalab/errors.hpp"
#include "betalab/poisson.hpp"
#include "betalab/rates.hpp"
#include "betalab/rng.hpp"

namespace betalab {

/// Event times and block counts of the block-counting chain started from
/// n blocks.  block_counts[i] is the count right after event_times[i];
/// the chain is cadlag, so the count at an event time is the post-merger
/// count.
struct BlockTrajectory {
  Alpha alpha;
  std::uint64_t initial_blocks = 0;
  double t_end = 0.0;
  std::vector<double> event_times;
  std::vector<std::uint64_t> block_counts;
};

namespace detail {

/// Incremental state of the embedded jump chain.  total_rate and the
/// 2-merger rate are carried along by one-step ratio updates as b
/// decreases, with a periodic log-gamma refresh to stop drift; no per-event
/// gamma evaluations in the hot loop.
struct JumpChainState {
  double alpha = 0.0;
  std::uint64_t b = 0;
  double total_rate = 0.0;  ///< lambda_b = Sum_k C(b,k) lambda_{b,k}
  double rate_bk2 = 0.0;    ///< lambda_{b,2}
  std::uint64_t decrements_since_refresh = 0;
  std::uint64_t scan_budget = 100'000'000;  ///< cumulative scan-step cap

  void refresh() {
    const double a = alpha;
    const double bd = static_cast<double>(b);
    total_rate = std::exp(std::lgamma(bd - 1.0 + a) - std::lgamma(bd - 1.0) -
                          std::log(a) - std::lgamma(a));
    rate_bk2 = std::exp(std::lgamma(bd - 2.0 + a) + std::lgamma(2.0 - a) -
                        std::lgamma(bd) - std::lgamma(2.0 - a) -
                        std::lgamma(a));
    decrements_since_refresh = 0;
  }

  void init(std::uint64_t b0, double a) {
    alpha = a;
    b = b0;
    refresh();
  }

  /// Merger size draw by sequential inverse-CDF over the ratio recurrence.
  std::uint64_t draw_merger_size(RngStream& rng) {
    const double a = alpha;
    const double bd = static_cast<double>(b);
    const double u = rng.uniform();
    double q = 0.5 * bd * (bd - 1.0) * rate_bk2 / total_rate;
    double cum = q;
    std::uint64_t k = 2;
    while (cum < u && k < b) {
      if (scan_budget-- == 0) {
        throw std::runtime_error(
            "coalescent: merger-size scan budget exhausted");
      }
      q *= merger_mass_ratio(bd, static_cast<double>(k), a);
      ++k;
      cum += q;
    }
    return k;  // floating-point leftover (u ~ 1) lands on k = b
  }

  /// Applies a merger of size k: b -> b - k + 1, rates updated by ratios.
  void apply_merger(std::uint64_t k) {
    const double a = alpha;
    for (std::uint64_t bb = b; bb > b - k + 1; --bb) {
      const double bd = static_cast<double>(bb);
      total_rate *= (bd - 2.0) / (bd - 2.0 + a);
      rate_bk2 *= (bd - 1.0) / (bd - 3.0 + a);
    }
    b -= k - 1;
    decrements_since_refresh += k - 1;
    if (decrements_since_refresh > (1u << 20) || b < 8) refresh();
  }
};

}  // namespace detail

/// One merger-size draw at block count b.  Never materializes the pmf.
inline std::uint64_t sample_merger_size(std::uint64_t b, Alpha alpha,
                                        RngStream& rng) {
  if (b < 2) throw std::domain_error("sample_merger_size: need b >= 2");
  detail::JumpChainState state;
  state.init(b, alpha.value());
  return state.draw_merger_size(rng);
}

/// Embedded-chain simulation of the block-counting process: exponential
/// holding times at the aggregate merge rate, merger sizes from the ratio
/// recurrence.  Exact in law; O(1) amortized work per event.
inline BlockTrajectory simulate_block_count(std::uint64_t n, Alpha alpha,
                                            double t_end, RngStream& rng) {
  if (n == 0) throw std::domain_error("simulate_block_count: need n >= 1");
  if (!(t_end > 0.0)) {
    throw std::domain_error("simulate_block_count: need t_end > 0");
  }
  BlockTrajectory traj{alpha, n, t_end, {}, {}};
  if (n == 1) return traj;

  detail::JumpChainState state;
  state.init(n, alpha.value());
  double t = 0.0;
  while (state.b > 1) {
    t += rng.exponential(state.total_rate);
    if (t > t_end) break;
    const std::uint64_t k = state.draw_merger_size(rng);
    state.apply_merger(k);
    traj.event_times.push_back(t);
    traj.block_counts.push_back(state.b);
  }
  return traj;
}

/// Streaming variant: only the count at t_end, no event storage.  Used by
/// the asymptotic experiments where trajectories would hold ~n events.
inline std::uint64_t simulate_block_count_at(std::uint64_t n, Alpha alpha,
                                             double t_end, RngStream& rng) {
  if (n == 0) throw std::domain_error("simulate_block_count_at: need n >= 1");
  if (n == 1) return 1;
  detail::JumpChainState state;
  state.init(n, alpha.value());
  double t = 0.0;
  while (state.b > 1) {
    t += rng.exponential(state.total_rate);
    if (t > t_end) break;
    state.apply_merger(state.draw_merger_size(rng));
  }
  return state.b;
}

/// Right-continuous step-function evaluation of a trajectory.
inline std::uint64_t block_count_at(const BlockTrajectory& traj, double t) {
  if (!(t >= 0.0) || t > traj.t_end) {
    throw std::domain_error("block_count_at: t outside simulated range");
  }
  // first event time strictly greater than t; count after the previous event
  const auto it = std::upper_bound(traj.event_times.begin(),
                                   traj.event_times.end(), t);
  if (it == traj.event_times.begin()) return traj.initial_blocks;
  return traj.block_counts[static_cast<std::size_t>(
      it - traj.event_times.begin() - 1)];
}

/// Poisson parameter of the ancestor count D(r): ((alpha-1) r)^{-1/(alpha-1)}.
inline double ancestor_poisson_parameter(double r, Alpha alpha) {
  alpha.require_cdi("ancestor_poisson_parameter");
  if (!(r > 0.0)) {
    throw std::domain_error("ancestor_poisson_parameter: need r > 0");
  }
  const double a = alpha.value();
  return std::pow((a - 1.0) * r, -1.0 / (a - 1.0));
}

/// Exact draw of the ancestor count D(r) via its Poisson marginal.
inline std::uint64_t sample_D(double r, Alpha alpha, RngStream& rng) {
  return sample_poisson(ancestor_poisson_parameter(r, alpha), rng);
}

}  // namespace betalab

#endif
