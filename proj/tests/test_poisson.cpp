#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "betalab/poisson.hpp"
#include "betalab/rng.hpp"
#include "betalab/stats.hpp"

#include "oracles.hpp"

using betalab::RngStream;
using betalab::sample_poisson;

TEST_CASE("theta zero gives zero") {
  RngStream rng(1, 0);
  for (int i = 0; i < 100; ++i) REQUIRE(sample_poisson(0.0, rng) == 0);
}

TEST_CASE("invalid theta rejected") {
  RngStream rng(1, 0);
  REQUIRE_THROWS_AS(sample_poisson(-1.0, rng), std::domain_error);
  REQUIRE_THROWS_AS(
      sample_poisson(std::numeric_limits<double>::infinity(), rng),
      std::domain_error);
}

TEST_CASE("small theta matches the exact pmf") {
  // inversion regime; chi-square against the exact Poisson(4) pmf
  const double theta = 4.0;
  RngStream rng(17, 0);
  const std::uint64_t n = 200000;
  std::vector<std::uint64_t> counts(25, 0);
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto k = sample_poisson(theta, rng);
    counts[std::min<std::uint64_t>(k, counts.size() - 1)]++;
  }
  std::vector<double> expected(counts.size());
  double p = std::exp(-theta), cum = 0.0;
  for (std::size_t k = 0; k + 1 < expected.size(); ++k) {
    expected[k] = p;
    cum += p;
    p *= theta / static_cast<double>(k + 1);
  }
  expected.back() = 1.0 - cum;
  REQUIRE(oracles::chi_square_p(counts, expected, n) > 1e-3);
}

TEST_CASE("large theta mean and dispersion") {
  // rejection regime; first two moments pin the scale
  const double theta = 1e4;
  RngStream rng(23, 0);
  betalab::SampleSet s;
  const std::uint64_t n = 100000;
  s.values.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    s.values.push_back(static_cast<double>(sample_poisson(theta, rng)));
  }
  const auto st = betalab::summary(s);
  REQUIRE(std::abs(st.mean - theta) < 5.0 * std::sqrt(theta / n));
  const double di = betalab::dispersion_index(s);
  REQUIRE(di > 0.97);
  REQUIRE(di < 1.03);
}

TEST_CASE("rejection regime pmf is exact") {
  // chi-square on a central window of Poisson(50)
  const double theta = 50.0;
  RngStream rng(29, 0);
  const std::uint64_t n = 200000;
  const std::uint64_t lo = 20, hi = 85;
  std::vector<std::uint64_t> counts(hi - lo + 2, 0);
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto k = sample_poisson(theta, rng);
    if (k < lo) {
      counts.back()++;
    } else {
      counts[std::min<std::uint64_t>(k - lo, counts.size() - 2)]++;
    }
  }
  std::vector<double> expected(counts.size(), 0.0);
  double covered = 0.0;
  for (std::uint64_t k = lo; k < hi; ++k) {
    const double logp = static_cast<double>(k) * std::log(theta) - theta -
                        std::lgamma(static_cast<double>(k) + 1.0);
    expected[k - lo] = std::exp(logp);
    covered += expected[k - lo];
  }
  expected[hi - lo] = 0.0;  // overflow cell handled with the tail below
  expected.back() = 1.0 - covered;
  REQUIRE(oracles::chi_square_p(counts, expected, n) > 1e-3);
}

TEST_CASE("concentration band at theta ten thousand") {
  const double theta = 1e4;
  const double band = std::pow(theta, 0.7);
  RngStream rng(31, 0);
  std::uint64_t inside = 0;
  const std::uint64_t n = 2000;
  for (std::uint64_t i = 0; i < n; ++i) {
    const double draw = static_cast<double>(sample_poisson(theta, rng));
    if (std::abs(draw - theta) <= band) ++inside;
  }
  REQUIRE(inside >= n - 1);  // 6.3 standard deviations out
}
