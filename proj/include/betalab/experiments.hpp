#ifndef BETALAB_EXPERIMENTS_HPP
#define BETALAB_EXPERIMENTS_HPP

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "betalab/alpha.hpp"
#include "betalab/coalescent.hpp"
#include "betalab/errors.hpp"
#include "betalab/levy.hpp"
#include "betalab/poisson.hpp"
#include "betalab/rates.hpp"
#include "betalab/rng.hpp"
#include "betalab/stable.hpp"
#include "betalab/stats.hpp"
#include "betalab/version.hpp"

namespace betalab {

/// Everything an experiment needs to be rerun bit-exactly.
struct ExperimentConfig {
  double alpha = 1.5;
  double t = 1e-3;
  std::uint64_t n_blocks = 0;
  std::uint64_t reps = 0;
  double step = 0.0;  ///< Levy grid; 0 means "pick the default t/1000"
  std::uint64_t seed = 0;
  std::map<std::string, double> tolerances;
  std::string out_dir;
  unsigned threads = 0;  ///< 0 means hardware concurrency
  bool override_gate = false;

  double tolerance(const std::string& key, double fallback) const {
    const auto it = tolerances.find(key);
    return it == tolerances.end() ? fallback : it->second;
  }
};

struct ExperimentReport {
  nlohmann::json json;

  bool all_passed() const {
    for (const auto& [name, v] : json.at("verdicts").items()) {
      (void)name;
      if (!v.get<bool>()) return false;
    }
    return true;
  }
};

/// Minimum starting block count for asymptotic coalescent experiments:
/// 50 times the predicted level v(t) ~ (alpha Gamma(alpha)/t)^{1/(alpha-1)}.
inline double gate_min_blocks(double t, Alpha alpha) {
  const double a = alpha.value();
  const double aga = a * std::exp(std::lgamma(a));
  return 50.0 * std::pow(aga / t, 1.0 / (a - 1.0));
}

namespace detail {

inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// Index-sharded parallel loop.  Results must be written to per-index
/// slots by the body; exceptions propagate (first one wins).
template <typename F>
inline void parallel_for(std::size_t n, unsigned threads, F&& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  const unsigned workers = static_cast<unsigned>(
      std::min<std::size_t>(threads, n));
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      try {
        for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
          body(i);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        next.store(n);  // stop handing out work
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

/// Stream-index namespaces; replicate i of a given purpose always draws
/// from the same stream regardless of threading.
enum class Purpose : std::uint64_t {
  kSpeed = 1,
  kCltChain = 2,
  kCltLimit = 3,
  kRfluctPath = 4,
  kRfluctLimit = 5,
  kPoisson = 6,
};

inline std::uint64_t stream_of(Purpose p, std::uint64_t i) {
  return (static_cast<std::uint64_t>(p) << 32) | i;
}

inline void write_csv(const std::string& out_dir, const std::string& name,
                      const std::vector<std::string>& header,
                      const std::vector<const std::vector<double>*>& cols) {
  if (out_dir.empty()) return;
  std::filesystem::create_directories(out_dir);
  std::ofstream out(std::filesystem::path(out_dir) / name,
                    std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("write_csv: cannot open " + name);
  for (std::size_t c = 0; c < header.size(); ++c) {
    out << (c ? "," : "") << header[c];
  }
  out << "\n";
  std::size_t rows = 0;
  for (const auto* col : cols) rows = std::max(rows, col->size());
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      if (c) out << ",";
      if (r < cols[c]->size()) out << fmt17((*cols[c])[r]);
    }
    out << "\n";
  }
}

inline nlohmann::json config_json(const ExperimentConfig& cfg) {
  nlohmann::json j{{"alpha", cfg.alpha},
                   {"t", cfg.t},
                   {"n_blocks", cfg.n_blocks},
                   {"reps", cfg.reps},
                   {"step", cfg.step},
                   {"seed", cfg.seed},
                   {"out_dir", cfg.out_dir},
                   {"threads", cfg.threads},
                   {"override_gate", cfg.override_gate},
                   {"gate_factor", 50}};
  j["tolerances"] = cfg.tolerances;
  return j;
}

inline nlohmann::json constants_json(Alpha alpha) {
  const CoalescentConstants c = constants(alpha);
  return nlohmann::json{{"gamma_alpha", c.gamma_alpha},
                        {"c_alpha", c.c_alpha},
                        {"d_alpha", c.d_alpha},
                        {"speed_const", c.speed_const},
                        {"x_scale", c.x_scale}};
}

inline nlohmann::json summary_json(const SampleSet& s) {
  const SummaryStats st = summary(s);
  nlohmann::json q;
  for (const auto& [p, v] : st.quantiles) q[std::to_string(p)] = v;
  return nlohmann::json{{"n", s.values.size()},
                        {"mean", st.mean},
                        {"stderr", st.stderr_mean},
                        {"quantiles", q}};
}

inline nlohmann::json ks_json(const KsResult& r) {
  return nlohmann::json{{"statistic", r.statistic},
                        {"scaled_statistic", r.scaled_statistic},
                        {"p_value", r.p_value}};
}

inline void require_valid(const ExperimentConfig& cfg) {
  if (cfg.reps < 1) throw config_error("config: reps must be >= 1");
  if (!(cfg.t > 0.0)) throw config_error("config: t must be > 0");
}

inline void require_gate(const ExperimentConfig& cfg, Alpha alpha) {
  const double gate = gate_min_blocks(cfg.t, alpha);
  if (static_cast<double>(cfg.n_blocks) < gate && !cfg.override_gate) {
    throw config_error("config: n_blocks " + std::to_string(cfg.n_blocks) +
                       " is below the asymptotic gate " + fmt17(gate) +
                       " (use the override to proceed anyway)");
  }
}

/// 95% central order-statistic band for the median of a sorted sample.
inline std::pair<double, double> median_band(std::vector<double> sorted) {
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  const double half_width = 1.96 * 0.5 * std::sqrt(n);
  const auto clampi = [&](double x) {
    return static_cast<std::size_t>(
        std::clamp(x, 0.0, n - 1.0));
  };
  return {sorted[clampi(n / 2.0 - half_width)],
          sorted[clampi(n / 2.0 + half_width)]};
}

}  // namespace detail

/// Speed-of-descent experiment: sample mean of t^{1/(alpha-1)} N(t) over
/// reps chains against (alpha Gamma(alpha))^{1/(alpha-1)}.
inline ExperimentReport run_speed_experiment(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  detail::require_valid(cfg);
  const Alpha alpha(cfg.alpha);
  alpha.require_cdi("run_speed_experiment");
  detail::require_gate(cfg, alpha);

  const double a = alpha.value();
  const double scale = std::pow(cfg.t, 1.0 / (a - 1.0));
  SampleSet stat;
  stat.label = "scaled_block_count";
  stat.master_seed = cfg.seed;
  stat.params = {{"alpha", cfg.alpha}, {"t", cfg.t},
                 {"n", static_cast<double>(cfg.n_blocks)}};
  stat.values.resize(cfg.reps);
  detail::parallel_for(cfg.reps, cfg.threads, [&](std::size_t i) {
    RngStream rng(cfg.seed,
                  detail::stream_of(detail::Purpose::kSpeed, i));
    const std::uint64_t n_t =
        simulate_block_count_at(cfg.n_blocks, alpha, cfg.t, rng);
    stat.values[i] = scale * static_cast<double>(n_t);
  });

  const CoalescentConstants c = constants(alpha);
  const SummaryStats st = summary(stat);
  const double rel_dev = std::abs(st.mean / c.speed_const - 1.0);
  const double tol = cfg.tolerance("mean_rel_dev", 0.05);

  detail::write_csv(cfg.out_dir, "speed_samples.csv", {"statistic"},
                    {&stat.values});

  ExperimentReport report;
  report.json = nlohmann::json{
      {"experiment", "speed"},
      {"config", detail::config_json(cfg)},
      {"constants", detail::constants_json(alpha)},
      {"statistics",
       {{"scaled_block_count", detail::summary_json(stat)},
        {"mean_rel_dev", rel_dev},
        {"gate_min_blocks", gate_min_blocks(cfg.t, alpha)}}},
      {"ks", nlohmann::json::object()},
      {"verdicts", {{"mean_within_tolerance", rel_dev < tol}}},
      {"version", kVersion}};
  report.json["runtime_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return report;
}

/// Fluctuation CLT experiment on the coalescent chain: the normalized
/// statistic S = t^{1/(alpha(alpha-1))} (N(t) - (alpha Gamma(alpha)/t)^{1/(alpha-1)})
/// is KS-compared with exact draws of -D_alpha X.
inline ExperimentReport run_clt_experiment(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  detail::require_valid(cfg);
  const Alpha alpha(cfg.alpha);
  alpha.require_cdi("run_clt_experiment");
  detail::require_gate(cfg, alpha);

  const double a = alpha.value();
  const CoalescentConstants c = constants(alpha);
  const double center = c.speed_const * std::pow(cfg.t, -1.0 / (a - 1.0));
  const double scale = std::pow(cfg.t, 1.0 / (a * (a - 1.0)));

  SampleSet stat, limit;
  stat.label = "normalized_fluctuation";
  limit.label = "limit_sample";
  stat.master_seed = limit.master_seed = cfg.seed;
  stat.params = {{"alpha", cfg.alpha}, {"t", cfg.t},
                 {"n", static_cast<double>(cfg.n_blocks)}};
  limit.params = {{"alpha", cfg.alpha}};
  stat.values.resize(cfg.reps);
  limit.values.resize(cfg.reps);

  detail::parallel_for(cfg.reps, cfg.threads, [&](std::size_t i) {
    RngStream chain_rng(cfg.seed,
                        detail::stream_of(detail::Purpose::kCltChain, i));
    const std::uint64_t n_t =
        simulate_block_count_at(cfg.n_blocks, alpha, cfg.t, chain_rng);
    stat.values[i] = scale * (static_cast<double>(n_t) - center);
    RngStream limit_rng(cfg.seed,
                        detail::stream_of(detail::Purpose::kCltLimit, i));
    limit.values[i] = -c.d_alpha * sample_limit_X(alpha, limit_rng);
  });

  const KsResult ks = ks_two_sample(stat, limit);
  const double ks_tol = cfg.tolerance("ks", 0.1);
  const auto [band_lo, band_hi] = detail::median_band(limit.values);
  const double median_s = summary(stat).quantiles.at(50);

  detail::write_csv(cfg.out_dir, "clt_samples.csv",
                    {"statistic", "limit_sample"},
                    {&stat.values, &limit.values});

  ExperimentReport report;
  report.json = nlohmann::json{
      {"experiment", "clt"},
      {"config", detail::config_json(cfg)},
      {"constants", detail::constants_json(alpha)},
      {"statistics",
       {{"normalized_fluctuation", detail::summary_json(stat)},
        {"limit_sample", detail::summary_json(limit)},
        {"median_band_low", band_lo},
        {"median_band_high", band_hi},
        {"gate_min_blocks", gate_min_blocks(cfg.t, alpha)}}},
      {"ks", {{"normalized_fluctuation", detail::ks_json(ks)}}},
      {"verdicts",
       {{"ks_within_tolerance", ks.statistic < ks_tol},
        {"median_in_band", median_s >= band_lo && median_s <= band_hi}}},
      {"version", kVersion}};
  report.json["runtime_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return report;
}

/// Time-change fluctuation experiment on simulated Levy paths: the three
/// normalized statistics built from R(t) and R^{-1}(t) against their exact
/// stable limit samples.
inline ExperimentReport run_rfluct_experiment(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  detail::require_valid(cfg);
  const Alpha alpha(cfg.alpha);
  alpha.require_cdi("run_rfluct_experiment");
  const double step = cfg.step > 0.0 ? cfg.step : cfg.t / 1000.0;
  if (step > cfg.t / 1000.0 * (1.0 + 1e-12)) {
    throw config_error("config: step must be <= t/1000 for the time-change "
                       "experiment");
  }
  const double horizon = 4.0 * cfg.t;
  if (horizon / step > 1e7) {
    throw config_error("config: step too small, grid exceeds 1e7 points");
  }

  const double a = alpha.value();
  const CoalescentConstants c = constants(alpha);
  const double fluct_scale = std::pow(cfg.t, 1.0 + 1.0 / a);
  const double clt_scale = std::pow(cfg.t, 1.0 / (a * (a - 1.0)));
  const double center = c.speed_const * std::pow(cfg.t, -1.0 / (a - 1.0));

  struct PathResult {
    double r = 0.0, rinv = 0.0;
    bool ok = false;
    bool exhausted = false;
    bool absorbed = false;
  };
  std::vector<PathResult> results(cfg.reps);
  std::vector<double> limit_raw(cfg.reps);

  detail::parallel_for(cfg.reps, cfg.threads, [&](std::size_t i) {
    RngStream path_rng(
        cfg.seed, detail::stream_of(detail::Purpose::kRfluctPath, i));
    const LevyPath path = simulate_path(alpha, horizon, step, path_rng);
    const TimeChangeCache cache = make_time_change_cache(path);
    try {
      results[i].r = compute_R(path, cache, cfg.t);
      results[i].rinv = r_inverse(path, cache, cfg.t);
      results[i].ok = true;
    } catch (const horizon_error&) {
      results[i].exhausted = true;
    } catch (const absorbed_error&) {
      results[i].absorbed = true;
    }
    RngStream limit_rng(
        cfg.seed, detail::stream_of(detail::Purpose::kRfluctLimit, i));
    limit_raw[i] = sample_limit_X(alpha, limit_rng);
  });

  SampleSet s_r, s_rinv, s_clt, l_r, l_rinv, l_clt;
  s_r.label = "r_fluctuation";
  s_rinv.label = "rinv_fluctuation";
  s_clt.label = "block_clt_proxy";
  l_r.label = "r_limit";
  l_rinv.label = "rinv_limit";
  l_clt.label = "block_clt_limit";
  for (SampleSet* s : {&s_r, &s_rinv, &s_clt, &l_r, &l_rinv, &l_clt}) {
    s->master_seed = cfg.seed;
    s->params = {{"alpha", cfg.alpha}, {"t", cfg.t}, {"step", step}};
  }

  std::size_t n_exhausted = 0, n_absorbed = 0;
  for (std::size_t i = 0; i < cfg.reps; ++i) {
    const PathResult& pr = results[i];
    if (pr.exhausted) ++n_exhausted;
    if (pr.absorbed) ++n_absorbed;
    if (!pr.ok) continue;
    s_r.values.push_back((pr.r - c.c_alpha * cfg.t) / fluct_scale);
    s_rinv.values.push_back((pr.rinv - cfg.t / c.c_alpha) / fluct_scale);
    s_clt.values.push_back(
        clt_scale *
        (std::pow((a - 1.0) * pr.rinv, -1.0 / (a - 1.0)) - center));
    l_r.values.push_back((1.0 - a) * c.c_alpha * limit_raw[i]);
    l_rinv.values.push_back((a - 1.0) /
                            std::pow(c.c_alpha, 1.0 + 1.0 / a) *
                            limit_raw[i]);
    l_clt.values.push_back(-c.d_alpha * limit_raw[i]);
  }
  if (s_r.values.empty()) {
    throw std::runtime_error("run_rfluct_experiment: no usable paths");
  }

  const KsResult ks_r = ks_two_sample(s_r, l_r);
  const KsResult ks_rinv = ks_two_sample(s_rinv, l_rinv);
  const KsResult ks_clt = ks_two_sample(s_clt, l_clt);
  const double ks_tol = cfg.tolerance("ks", 0.05);
  const bool valid =
      static_cast<double>(n_exhausted) <= 0.01 * static_cast<double>(cfg.reps);
  const double rho = spearman_rho(s_r.values, s_clt.values);

  detail::write_csv(
      cfg.out_dir, "rfluct_samples.csv",
      {"statistic", "limit_sample", "rinv_statistic", "rinv_limit_sample",
       "clt_statistic", "clt_limit_sample"},
      {&s_r.values, &l_r.values, &s_rinv.values, &l_rinv.values,
       &s_clt.values, &l_clt.values});

  ExperimentReport report;
  report.json = nlohmann::json{
      {"experiment", "rfluct"},
      {"config", detail::config_json(cfg)},
      {"constants", detail::constants_json(alpha)},
      {"statistics",
       {{"r_fluctuation", detail::summary_json(s_r)},
        {"rinv_fluctuation", detail::summary_json(s_rinv)},
        {"block_clt_proxy", detail::summary_json(s_clt)},
        {"horizon_exhausted", n_exhausted},
        {"absorbed", n_absorbed},
        {"spearman_r_vs_clt", rho},
        {"effective_step", step}}},
      {"ks",
       {{"r_fluctuation", detail::ks_json(ks_r)},
        {"rinv_fluctuation", detail::ks_json(ks_rinv)},
        {"block_clt_proxy", detail::ks_json(ks_clt)}}},
      {"verdicts",
       {{"r_ks_within_tolerance", ks_r.statistic < ks_tol},
        {"rinv_ks_within_tolerance", ks_rinv.statistic < ks_tol},
        {"clt_ks_within_tolerance", ks_clt.statistic < ks_tol},
        {"exhaustion_below_1_percent", valid}}},
      {"version", kVersion}};
  report.json["runtime_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return report;
}

/// Poisson concentration experiment: coverage of |draw - theta| <= theta^{0.7}
/// over the grid theta in {1e2, 1e3, 1e4}.
inline ExperimentReport run_poisson_experiment(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  detail::require_valid(cfg);

  const std::vector<double> grid = {1e2, 1e3, 1e4};
  const double exponent = 0.7;  // 1/2 + epsilon with epsilon = 0.2
  nlohmann::json stats = nlohmann::json::object();
  std::vector<double> theta_col, draw_col;
  double coverage_at_1e4 = 0.0;
  double max_normalized_dev = 0.0;
  std::vector<double> coverages;

  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double theta = grid[g];
    RngStream rng(cfg.seed,
                  detail::stream_of(detail::Purpose::kPoisson, g));
    const double band = std::pow(theta, exponent);
    std::uint64_t inside = 0;
    for (std::uint64_t i = 0; i < cfg.reps; ++i) {
      const double draw =
          static_cast<double>(sample_poisson(theta, rng));
      const double dev = std::abs(draw - theta);
      if (dev <= band) ++inside;
      max_normalized_dev = std::max(max_normalized_dev, dev / band);
      theta_col.push_back(theta);
      draw_col.push_back(draw);
    }
    const double coverage =
        static_cast<double>(inside) / static_cast<double>(cfg.reps);
    coverages.push_back(coverage);
    if (theta == 1e4) coverage_at_1e4 = coverage;
    stats["coverage_theta_" + std::to_string(static_cast<int>(theta))] =
        coverage;
  }
  stats["max_normalized_deviation"] = max_normalized_dev;
  stats["coverage_nondecreasing"] =
      std::is_sorted(coverages.begin(), coverages.end());

  const double required = cfg.tolerance("coverage", 0.999);

  detail::write_csv(cfg.out_dir, "poisson_samples.csv", {"theta", "draw"},
                    {&theta_col, &draw_col});

  ExperimentReport report;
  report.json = nlohmann::json{
      {"experiment", "poisson"},
      {"config", detail::config_json(cfg)},
      {"constants", nlohmann::json::object()},
      {"statistics", stats},
      {"ks", nlohmann::json::object()},
      {"verdicts",
       {{"coverage_at_1e4", coverage_at_1e4 >= required}}},
      {"version", kVersion}};
  report.json["runtime_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return report;
}

}  // namespace betalab

#endif
