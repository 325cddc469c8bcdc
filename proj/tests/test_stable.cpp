#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "betalab/alpha.hpp"
#include "betalab/rng.hpp"
#include "betalab/stable.hpp"
#include "betalab/stats.hpp"

using betalab::Alpha;
using betalab::RngStream;

namespace {

// Empirical Laplace transform of f(draw) against a target, in SE units.
template <typename Sampler>
double laplace_deviation_se(Sampler&& sample, double lambda, double target,
                            int n) {
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double e = std::exp(-lambda * sample());
    sum += e;
    sum2 += e * e;
  }
  const double mean = sum / n;
  const double var = (sum2 - n * mean * mean) / (n - 1.0);
  return (mean - target) / std::sqrt(var / n);
}

}  // namespace

TEST_CASE("standard draw has Laplace transform e^{lambda^alpha}") {
  // the transform diverges for lambda < 0 and equals e^{+lambda^alpha} on
  // lambda >= 0; spot values at several (lambda, alpha) pairs, 4 SE band
  const int n = 300000;
  for (double a : {1.2, 1.5, 1.8}) {
    const Alpha alpha(a);
    RngStream rng(101, static_cast<std::uint64_t>(a * 10));
    auto sampler = [&] { return betalab::sample_standard_stable(alpha, rng); };
    for (double lambda : {0.25, 0.5, 1.0, 2.0}) {
      const double target = std::exp(std::pow(lambda, a));
      // e^{-lambda S} has finite variance: E e^{-2 lambda S} = e^{(2l)^a}
      const double dev = laplace_deviation_se(sampler, lambda, target, n);
      INFO("alpha " << a << " lambda " << lambda << " dev " << dev);
      REQUIRE(std::abs(dev) < 4.0);
    }
  }
}

TEST_CASE("limit X draw has Laplace transform exp(lambda^alpha/(alpha+1))") {
  const int n = 300000;
  for (double a : {1.2, 1.5, 1.8}) {
    const Alpha alpha(a);
    RngStream rng(202, static_cast<std::uint64_t>(a * 10));
    auto sampler = [&] { return betalab::sample_limit_X(alpha, rng); };
    for (double lambda : {0.5, 1.0, 2.0}) {
      const double target = std::exp(std::pow(lambda, a) / (a + 1.0));
      const double dev = laplace_deviation_se(sampler, lambda, target, n);
      INFO("alpha " << a << " lambda " << lambda << " dev " << dev);
      REQUIRE(std::abs(dev) < 4.0);
    }
  }
}

TEST_CASE("increment scaling follows dt^{1/alpha}") {
  const Alpha alpha(1.5);
  RngStream rng1(7, 0), rng2(7, 0);
  const double dt = 0.04;
  for (int i = 0; i < 100; ++i) {
    const auto inc = betalab::sample_increment(alpha, dt, rng1);
    const double standard = betalab::sample_standard_stable(alpha, rng2);
    REQUIRE(inc.value ==
            Catch::Approx(std::pow(dt, 1.0 / 1.5) * standard).margin(1e-15));
    REQUIRE(inc.time_scale == dt);
  }
  REQUIRE_THROWS_AS(betalab::sample_increment(alpha, 0.0, rng1),
                    std::domain_error);
}

TEST_CASE("limit scale constant") {
  REQUIRE(std::abs(betalab::limit_x_scale(Alpha(1.5)) -
                   std::pow(2.5, -1.0 / 1.5)) < 1e-15);
}

TEST_CASE("sampler rejects alpha outside the regime") {
  RngStream rng(1, 0);
  REQUIRE_THROWS_AS(betalab::sample_standard_stable(Alpha(0.9), rng),
                    betalab::regime_error);
  REQUIRE_THROWS_AS(Alpha(2.0), std::domain_error);
  REQUIRE_THROWS_AS(Alpha(-0.1), std::domain_error);
}

TEST_CASE("draws are deterministic per stream") {
  const Alpha alpha(1.7);
  RngStream a(55, 9), b(55, 9);
  for (int i = 0; i < 100; ++i) {
    REQUIRE(betalab::sample_standard_stable(alpha, a) ==
            betalab::sample_standard_stable(alpha, b));
  }
}
