#ifndef BETALAB_STATS_HPP
#define BETALAB_STATS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace betalab {

/// Tagged collection of i.i.d. real samples with enough provenance to
/// regenerate it bit-exactly.
struct SampleSet {
  std::vector<double> values;
  std::string label;
  std::uint64_t master_seed = 0;
  std::map<std::string, double> params;
};

struct KsResult {
  double statistic = 0.0;         ///< sup |F_a - F_b| in [0,1]
  double scaled_statistic = 0.0;  ///< sqrt(nm/(n+m)) * statistic
  double p_value = 1.0;
};

struct SummaryStats {
  double mean = 0.0;
  double stderr_mean = 0.0;
  std::map<int, double> quantiles;  ///< keys 1, 5, 25, 50, 75, 95, 99
};

/// Survival function of the Kolmogorov distribution,
/// K(x) = 2 Sum_{j>=1} (-1)^{j-1} e^{-2 j^2 x^2}, truncated at 1e-12 terms.
inline double kolmogorov_p_value(double x) {
  if (!(x > 0.0)) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 100000; ++j) {
    const double term = std::exp(-2.0 * static_cast<double>(j) *
                                 static_cast<double>(j) * x * x);
    sum += sign * term;
    if (term < 1e-12) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

/// Two-sample Kolmogorov-Smirnov test: exact sup-distance between the
/// empirical CDFs by merging the sorted samples, ties processed in full
/// before the sup is taken; asymptotic p-value.
inline KsResult ks_two_sample(const SampleSet& a, const SampleSet& b) {
  if (a.values.empty() || b.values.empty()) {
    throw std::domain_error("ks_two_sample: empty sample");
  }
  std::vector<double> xs(a.values), ys(b.values);
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  const double na = static_cast<double>(xs.size());
  const double nb = static_cast<double>(ys.size());

  double d = 0.0, diff = 0.0;
  std::size_t i = 0, j = 0;
  while (i < xs.size() && j < ys.size()) {
    const double x = std::min(xs[i], ys[j]);
    while (i < xs.size() && xs[i] == x) {
      diff += 1.0 / na;
      ++i;
    }
    while (j < ys.size() && ys[j] == x) {
      diff -= 1.0 / nb;
      ++j;
    }
    d = std::max(d, std::abs(diff));
  }
  d = std::max(d, std::abs(diff));

  KsResult result;
  result.statistic = d;
  result.scaled_statistic = std::sqrt(na * nb / (na + nb)) * d;
  result.p_value = kolmogorov_p_value(result.scaled_statistic);
  return result;
}

/// Mean and standard error of e^{-lambda v} over the sample.
inline std::pair<double, double> empirical_laplace(const SampleSet& a,
                                                   double lambda) {
  if (!(lambda >= 0.0)) {
    throw std::domain_error("empirical_laplace: lambda must be >= 0");
  }
  if (a.values.empty()) throw std::domain_error("empirical_laplace: empty");
  const double n = static_cast<double>(a.values.size());
  double sum = 0.0, sum2 = 0.0;
  for (double v : a.values) {
    const double e = std::exp(-lambda * v);
    sum += e;
    sum2 += e * e;
  }
  const double mean = sum / n;
  if (a.values.size() < 2) return {mean, 0.0};
  const double var = std::max(0.0, (sum2 - n * mean * mean) / (n - 1.0));
  return {mean, std::sqrt(var / n)};
}

/// Sample variance (unbiased) divided by sample mean.
inline double dispersion_index(const SampleSet& a) {
  if (a.values.size() < 2) {
    throw std::domain_error("dispersion_index: need >= 2 values");
  }
  const double n = static_cast<double>(a.values.size());
  const double mean =
      std::accumulate(a.values.begin(), a.values.end(), 0.0) / n;
  if (mean == 0.0) throw std::domain_error("dispersion_index: zero mean");
  double ss = 0.0;
  for (double v : a.values) ss += (v - mean) * (v - mean);
  return ss / (n - 1.0) / mean;
}

/// Mean, standard error and standard quantiles (linear interpolation of
/// order statistics).
inline SummaryStats summary(const SampleSet& a) {
  if (a.values.empty()) throw std::domain_error("summary: empty sample");
  const double n = static_cast<double>(a.values.size());
  SummaryStats s;
  s.mean = std::accumulate(a.values.begin(), a.values.end(), 0.0) / n;
  if (a.values.size() >= 2) {
    double ss = 0.0;
    for (double v : a.values) ss += (v - s.mean) * (v - s.mean);
    s.stderr_mean = std::sqrt(ss / (n - 1.0) / n);
  }
  std::vector<double> sorted(a.values);
  std::sort(sorted.begin(), sorted.end());
  for (int p : {1, 5, 25, 50, 75, 95, 99}) {
    const double pos = (n - 1.0) * static_cast<double>(p) / 100.0;
    const auto i = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(i);
    const double q = i + 1 < sorted.size()
                         ? sorted[i] + frac * (sorted[i + 1] - sorted[i])
                         : sorted.back();
    s.quantiles[p] = q;
  }
  return s;
}

/// Spearman rank correlation (ordinal ranks; samples here are continuous,
/// ties have probability zero).
inline double spearman_rho(const std::vector<double>& a,
                           const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw std::domain_error("spearman_rho: need two equal samples, n >= 2");
  }
  const auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t x, std::size_t y) { return v[x] < v[y]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
      r[idx[i]] = static_cast<double>(i);
    }
    return r;
  };
  const std::vector<double> ra = ranks(a), rb = ranks(b);
  const double n = static_cast<double>(a.size());
  const double mean = (n - 1.0) / 2.0;
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    cov += (ra[i] - mean) * (rb[i] - mean);
    va += (ra[i] - mean) * (ra[i] - mean);
    vb += (rb[i] - mean) * (rb[i] - mean);
  }
  return cov / std::sqrt(va * vb);
}

}  // namespace betalab

#endif
