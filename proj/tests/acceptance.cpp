// Acceptance gate: every distributional and numerical claim the library
// makes, at full scale, one pass/fail line per criterion.  Run with
// --only N to run a single criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "betalab/alpha.hpp"
#include "betalab/coalescent.hpp"
#include "betalab/experiments.hpp"
#include "betalab/levy.hpp"
#include "betalab/poisson.hpp"
#include "betalab/rates.hpp"
#include "betalab/rng.hpp"
#include "betalab/stable.hpp"
#include "betalab/stats.hpp"

#include "oracles.hpp"

using betalab::Alpha;
using betalab::RngStream;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Check {
  int id;
  const char* name;
  double runtime_limit_seconds;
  std::function<Outcome()> run;
};

void note(Outcome& o, bool ok, const std::string& what) {
  if (!ok) {
    o.pass = false;
    if (!o.detail.empty()) o.detail += "; ";
    o.detail += what;
  }
}

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

// --- 1: closed-form rates vs quadrature, plus the consistency recursion ---

Outcome check_rates() {
  Outcome o;
  double worst_quad = 0.0;
  for (double a : {1.2, 1.5, 1.8}) {
    const Alpha alpha(a);
    for (std::uint64_t b = 2; b <= 100; ++b) {
      for (std::uint64_t k = 2; k <= b; ++k) {
        const double closed = betalab::lambda_bk(b, k, alpha);
        const double quad = oracles::lambda_bk_quadrature(b, k, alpha);
        worst_quad = std::max(worst_quad, std::abs(closed / quad - 1.0));
      }
    }
  }
  note(o, worst_quad < 1e-8, "quadrature max rel err " + num(worst_quad));

  double worst_cons = 0.0;
  for (double a : {1.2, 1.5, 1.8}) {
    const Alpha alpha(a);
    for (std::uint64_t b = 2; b <= 60; ++b) {
      for (std::uint64_t k = 2; k <= b; ++k) {
        const double lhs = betalab::lambda_bk(b, k, alpha);
        const double rhs = betalab::lambda_bk(b + 1, k, alpha) +
                           betalab::lambda_bk(b + 1, k + 1, alpha);
        worst_cons = std::max(worst_cons, std::abs(lhs / rhs - 1.0));
      }
    }
  }
  note(o, worst_cons < 1e-10, "consistency max rel err " + num(worst_cons));
  if (o.pass) {
    o.detail = "quadrature " + num(worst_quad) + ", consistency " +
               num(worst_cons);
  }
  return o;
}

// --- 2: psi asymptotics at both ends ---

Outcome check_psi() {
  Outcome o;
  for (double a : {1.2, 1.5, 1.8}) {
    const Alpha alpha(a);
    const double c_alpha = betalab::constants(alpha).c_alpha;
    const double q = 1e5;
    const double ratio =
        betalab::psi(q, alpha) * c_alpha / std::pow(q, a);
    note(o, std::abs(ratio - 1.0) < 0.01,
         "alpha " + num(a) + ": q^-a psi(1e5) C_a = " + num(ratio));
    const double small = betalab::psi(0.01, alpha) / 5e-5;
    note(o, std::abs(small - 1.0) < 0.01,
         "alpha " + num(a) + ": psi(0.01)/(q^2/2) = " + num(small));
  }
  if (o.pass) o.detail = "both asymptotes within 1% at all alpha";
  return o;
}

// --- 3: speed function power law ---

Outcome check_speed_function() {
  Outcome o;
  const double t = 1e-4;
  for (double a : {1.2, 1.5, 1.8}) {
    const Alpha alpha(a);
    const double target = betalab::constants(alpha).speed_const;
    const double scaled =
        std::pow(t, 1.0 / (a - 1.0)) * betalab::v_psi(t, alpha);
    note(o, std::abs(scaled / target - 1.0) < 0.02,
         "alpha " + num(a) + ": scaled speed " + num(scaled) + " vs " +
             num(target));
    if (o.pass) o.detail += (o.detail.empty() ? "" : ", ") + num(scaled);
  }
  return o;
}

// --- 4: stable sampler Laplace conformance ---

Outcome check_stable() {
  Outcome o;
  const int n = 1000000;
  for (double a : {1.2, 1.5, 1.8}) {
    const Alpha alpha(a);
    RngStream rng(2024, static_cast<std::uint64_t>(10 * a));
    std::vector<double> draws(n);
    for (int i = 0; i < n; ++i) {
      draws[i] = betalab::sample_standard_stable(alpha, rng);
    }
    const double x_scale = betalab::limit_x_scale(alpha);
    for (double lambda : {0.25, 0.5, 1.0, 2.0}) {
      double sum = 0.0, sum2 = 0.0, xsum = 0.0, xsum2 = 0.0;
      for (double d : draws) {
        const double e = std::exp(-lambda * d);
        sum += e;
        sum2 += e * e;
        const double ex = std::exp(-lambda * x_scale * d);
        xsum += ex;
        xsum2 += ex * ex;
      }
      const double mean = sum / n;
      const double se =
          std::sqrt((sum2 - n * mean * mean) / (n - 1.0) / n);
      const double target = std::exp(std::pow(lambda, a));
      note(o, std::abs(mean - target) < 3.0 * se,
           "alpha " + num(a) + " lambda " + num(lambda) + ": " + num(mean) +
               " vs " + num(target) + " se " + num(se));

      const double xmean = xsum / n;
      const double xse =
          std::sqrt((xsum2 - n * xmean * xmean) / (n - 1.0) / n);
      const double xtarget = std::exp(std::pow(lambda, a) / (a + 1.0));
      note(o, std::abs(xmean - xtarget) < 3.0 * xse,
           "X alpha " + num(a) + " lambda " + num(lambda) + ": " +
               num(xmean) + " vs " + num(xtarget));
    }
  }
  if (o.pass) o.detail = "all 24 transform points within 3 SE";
  return o;
}

// --- 5: CSBP marginal at time one ---

Outcome check_csbp() {
  Outcome o;
  const Alpha alpha(1.5);
  const double h = 1e-4;
  const int n = 100000;
  double lap = 0.0, lap2 = 0.0, ext = 0.0, ext2 = 0.0;
  int exhausted = 0;
  for (int i = 0; i < n; ++i) {
    RngStream rng(777, static_cast<std::uint64_t>(i));
    const auto c = betalab::csbp_conditional_at(alpha, 1.0, 1.0, h, rng);
    if (c.exhausted) ++exhausted;
    lap += c.laplace_value;
    lap2 += c.laplace_value * c.laplace_value;
    ext += c.extinction_probability;
    ext2 += c.extinction_probability * c.extinction_probability;
  }
  const double lap_mean = lap / n;
  const double lap_se =
      std::sqrt((lap2 - n * lap_mean * lap_mean) / (n - 1.0) / n);
  const double lap_target = std::exp(-4.0 / 9.0);
  note(o, std::abs(lap_mean - lap_target) < 3.0 * lap_se,
       "Laplace " + num(lap_mean) + " vs " + num(lap_target) + " se " +
           num(lap_se));

  const double surv_mean = 1.0 - ext / n;
  const double ext_mean = ext / n;
  const double ext_se =
      std::sqrt((ext2 - n * ext_mean * ext_mean) / (n - 1.0) / n);
  const double surv_target = 1.0 - std::exp(-4.0);
  note(o, std::abs(surv_mean - surv_target) < 3.0 * ext_se,
       "survival " + num(surv_mean) + " vs " + num(surv_target) + " se " +
           num(ext_se));
  if (o.pass) {
    o.detail = "Laplace " + num(lap_mean) + ", survival " + num(surv_mean) +
               ", exhausted " + std::to_string(exhausted);
  }
  return o;
}

// --- 6: Poisson concentration and dispersion ---

Outcome check_poisson() {
  Outcome o;
  const double theta = 1e4;
  const double band = std::pow(theta, 0.7);
  RngStream rng(31337, 0);
  int inside = 0;
  for (int i = 0; i < 1000; ++i) {
    const double d = static_cast<double>(betalab::sample_poisson(theta, rng));
    if (std::abs(d - theta) <= band) ++inside;
  }
  note(o, inside >= 999, "coverage " + std::to_string(inside) + "/1000");

  betalab::SampleSet s;
  s.values.reserve(100000);
  for (int i = 0; i < 100000; ++i) {
    s.values.push_back(
        static_cast<double>(betalab::sample_poisson(theta, rng)));
  }
  const double di = betalab::dispersion_index(s);
  note(o, di >= 0.97 && di <= 1.03, "dispersion " + num(di));
  if (o.pass) {
    o.detail =
        "coverage " + std::to_string(inside) + "/1000, dispersion " + num(di);
  }
  return o;
}

// --- 7: time-change fluctuation limits ---

Outcome check_rfluct() {
  Outcome o;
  betalab::ExperimentConfig cfg;
  cfg.alpha = 1.5;
  cfg.t = 1e-3;
  cfg.step = 1e-7;
  cfg.reps = 2000;
  cfg.seed = 424242;
  cfg.threads = 0;
  const auto report = betalab::run_rfluct_experiment(cfg);
  for (const char* key :
       {"r_fluctuation", "rinv_fluctuation", "block_clt_proxy"}) {
    const double ks = report.json["ks"][key]["statistic"].get<double>();
    note(o, ks < 0.05, std::string(key) + " ks " + num(ks));
    if (o.pass) o.detail += (o.detail.empty() ? "ks " : ", ") + num(ks);
  }
  note(o, report.json["verdicts"]["exhaustion_below_1_percent"].get<bool>(),
       "horizon exhaustion above 1%");
  return o;
}

// --- 8: main fluctuation limit on the coalescent chain ---

Outcome check_clt() {
  Outcome o;
  betalab::ExperimentConfig cfg;
  cfg.alpha = 1.5;
  cfg.t = 0.02;
  cfg.n_blocks = 200000;
  cfg.reps = 2000;
  cfg.seed = 515151;
  cfg.threads = 0;
  cfg.override_gate = true;  // gate at t=0.02 needs 2.2e5 blocks
  const auto first = betalab::run_clt_experiment(cfg);
  const double ks1 =
      first.json["ks"]["normalized_fluctuation"]["statistic"].get<double>();
  note(o, ks1 < 0.1, "ks at t=0.02: " + num(ks1));

  cfg.t = 0.01;
  cfg.n_blocks = 1000000;
  const auto second = betalab::run_clt_experiment(cfg);
  const double ks2 =
      second.json["ks"]["normalized_fluctuation"]["statistic"].get<double>();
  note(o, ks2 <= ks1 + 1e-12,
       "ks grew on refinement: " + num(ks1) + " -> " + num(ks2));
  if (o.pass) o.detail = "ks " + num(ks1) + " -> " + num(ks2);
  return o;
}

// --- 9: speed of coming down from infinity on the chain ---

Outcome check_speed_chain() {
  Outcome o;
  betalab::ExperimentConfig cfg;
  cfg.alpha = 1.5;
  cfg.t = 1e-3;
  cfg.n_blocks = 10000000;
  cfg.reps = 50;
  cfg.seed = 616161;
  cfg.threads = 0;
  cfg.override_gate = true;  // gate needs 8.8e7; documented finite-n bias
  const auto report = betalab::run_speed_experiment(cfg);
  const double mean =
      report.json["statistics"]["scaled_block_count"]["mean"].get<double>();
  const double target = betalab::constants(Alpha(1.5)).speed_const;
  note(o, std::abs(mean / target - 1.0) < 0.05,
       "mean t^2 N(t) = " + num(mean) + " vs " + num(target));
  if (o.pass) o.detail = "mean " + num(mean);
  return o;
}

// --- 10: determinism across reruns and thread counts ---

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome check_determinism() {
  Outcome o;
  betalab::ExperimentConfig cfg;
  cfg.alpha = 1.5;
  cfg.t = 0.05;
  cfg.n_blocks = 60000;
  cfg.reps = 100;
  cfg.seed = 8080;

  cfg.threads = 1;
  cfg.out_dir = "/tmp/betalab_acc_a";
  betalab::run_clt_experiment(cfg);
  cfg.threads = 3;
  cfg.out_dir = "/tmp/betalab_acc_b";
  betalab::run_clt_experiment(cfg);
  note(o, slurp("/tmp/betalab_acc_a/clt_samples.csv") ==
              slurp("/tmp/betalab_acc_b/clt_samples.csv"),
       "clt dumps differ across thread counts");

  betalab::ExperimentConfig rf;
  rf.alpha = 1.5;
  rf.t = 1e-3;
  rf.step = 1e-6;
  rf.reps = 60;
  rf.seed = 9090;
  rf.threads = 2;
  rf.out_dir = "/tmp/betalab_acc_c";
  betalab::run_rfluct_experiment(rf);
  rf.threads = 1;
  rf.out_dir = "/tmp/betalab_acc_d";
  betalab::run_rfluct_experiment(rf);
  note(o, slurp("/tmp/betalab_acc_c/rfluct_samples.csv") ==
              slurp("/tmp/betalab_acc_d/rfluct_samples.csv"),
       "rfluct dumps differ across thread counts");

  for (const char* d : {"/tmp/betalab_acc_a", "/tmp/betalab_acc_b",
                        "/tmp/betalab_acc_c", "/tmp/betalab_acc_d"}) {
    std::filesystem::remove_all(d);
  }
  if (o.pass) o.detail = "byte-identical dumps at 1, 2 and 3 threads";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::strcmp(argv[i], "--only") == 0) only = std::atoi(argv[i + 1]);
  }

  const std::vector<Check> checks = {
      {1, "rate-correctness", 10.0, check_rates},
      {2, "psi-asymptotics", 5.0, check_psi},
      {3, "speed-function", 10.0, check_speed_function},
      {4, "stable-sampler", 120.0, check_stable},
      {5, "csbp-marginal", 300.0, check_csbp},
      {6, "poisson-concentration", 10.0, check_poisson},
      {7, "time-change-fluctuations", 600.0, check_rfluct},
      {8, "block-count-fluctuations", 900.0, check_clt},
      {9, "descent-speed", 300.0, check_speed_chain},
      {10, "determinism", 600.0, check_determinism},
  };

  int failures = 0;
  for (const Check& c : checks) {
    if (only != 0 && c.id != only) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (elapsed >= c.runtime_limit_seconds) {
      o.pass = false;
      o.detail += (o.detail.empty() ? "" : "; ") + std::string("runtime ") +
                  num(elapsed) + "s over limit " +
                  num(c.runtime_limit_seconds) + "s";
    }
    std::printf("[%s] %2d %-28s (%.1fs) %s\n", o.pass ? "PASS" : "FAIL",
                c.id, c.name, elapsed, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  if (failures > 0) {
    std::printf("%d criterion(s) failed\n", failures);
  }
  return failures == 0 ? 0 : 1;
}
