// Command-line front end: named reproducible experiments plus raw dumps.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "betalab/coalescent.hpp"
#include "betalab/errors.hpp"
#include "betalab/experiments.hpp"
#include "betalab/levy.hpp"
#include "betalab/rates.hpp"
#include "betalab/version.hpp"

namespace {

struct CliOptions {
  betalab::ExperimentConfig cfg;
  std::vector<std::string> tolerance_kv;
};

void add_common_flags(CLI::App* cmd, CliOptions& opts, bool alpha_required) {
  auto* alpha_opt =
      cmd->add_option("--alpha", opts.cfg.alpha, "stability index in (0,2)");
  if (alpha_required) alpha_opt->required();
  cmd->add_option("--t", opts.cfg.t, "evaluation time");
  cmd->add_option("--n-blocks", opts.cfg.n_blocks, "initial block count");
  cmd->add_option("--reps", opts.cfg.reps, "Monte Carlo replicates");
  cmd->add_option("--step", opts.cfg.step, "Levy grid step");
  cmd->add_option("--seed", opts.cfg.seed, "master seed");
  cmd->add_option("--out-dir", opts.cfg.out_dir, "directory for CSV dumps");
  cmd->add_option("--threads", opts.cfg.threads,
                  "worker threads (0 = all cores)");
  cmd->add_option("--tolerance", opts.tolerance_kv,
                  "tolerance override, KEY=VAL (repeatable)");
  cmd->add_flag("--override-gate", opts.cfg.override_gate,
                "skip the asymptotic n-blocks gate (recorded in the report)");
}

void parse_tolerances(CliOptions& opts) {
  for (const std::string& kv : opts.tolerance_kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw betalab::config_error("tolerance override must be KEY=VAL: " + kv);
    }
    opts.cfg.tolerances[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
  }
}

int emit_report(const betalab::ExperimentReport& report) {
  std::cout << report.json.dump(2) << "\n";
  return report.all_passed() ? 0 : 1;
}

void dump_levy_path(const CliOptions& opts) {
  const betalab::Alpha alpha(opts.cfg.alpha);
  const double horizon = opts.cfg.t > 0.0 ? opts.cfg.t : 1.0;
  const double step = opts.cfg.step > 0.0 ? opts.cfg.step : horizon / 1000.0;
  betalab::RngStream rng(opts.cfg.seed, 0);
  const betalab::LevyPath path =
      betalab::simulate_path(alpha, horizon, step, rng);

  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!opts.cfg.out_dir.empty()) {
    std::filesystem::create_directories(opts.cfg.out_dir);
    file.open(std::filesystem::path(opts.cfg.out_dir) / "levy_path.csv",
              std::ios::binary | std::ios::trunc);
    out = &file;
  }
  *out << "time,value\n";
  for (std::size_t i = 0; i < path.values.size(); ++i) {
    *out << betalab::detail::fmt17(static_cast<double>(i) * path.step) << ","
         << betalab::detail::fmt17(path.values[i]) << "\n";
  }
}

void dump_coalescent(const CliOptions& opts) {
  const betalab::Alpha alpha(opts.cfg.alpha);
  const std::uint64_t n = opts.cfg.n_blocks > 0 ? opts.cfg.n_blocks : 1000;
  const double t_end = opts.cfg.t > 0.0 ? opts.cfg.t : 1.0;
  betalab::RngStream rng(opts.cfg.seed, 0);
  const betalab::BlockTrajectory traj =
      betalab::simulate_block_count(n, alpha, t_end, rng);

  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!opts.cfg.out_dir.empty()) {
    std::filesystem::create_directories(opts.cfg.out_dir);
    file.open(std::filesystem::path(opts.cfg.out_dir) / "coalescent.csv",
              std::ios::binary | std::ios::trunc);
    out = &file;
  }
  *out << "event_time,block_count\n";
  for (std::size_t i = 0; i < traj.event_times.size(); ++i) {
    *out << betalab::detail::fmt17(traj.event_times[i]) << ","
         << traj.block_counts[i] << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Beta-coalescent and stable time-change laboratory"};
  app.require_subcommand(1);
  app.set_version_flag("--version", betalab::kVersion);

  CliOptions opts;
  opts.cfg.threads = 0;

  auto* constants_cmd =
      app.add_subcommand("constants", "named constants for one alpha");
  auto* rates_cmd =
      app.add_subcommand("rates", "merger law at a fixed block count");
  auto* speed_cmd =
      app.add_subcommand("speed", "speed-of-descent experiment");
  auto* clt_cmd =
      app.add_subcommand("clt", "block-count fluctuation experiment");
  auto* rfluct_cmd =
      app.add_subcommand("rfluct", "time-change fluctuation experiment");
  auto* poisson_cmd =
      app.add_subcommand("poisson", "Poisson concentration experiment");
  auto* dump_path_cmd =
      app.add_subcommand("dump-path", "dump one Levy path as CSV");
  auto* dump_coal_cmd =
      app.add_subcommand("dump-coalescent", "dump one trajectory as CSV");

  for (CLI::App* cmd : {constants_cmd, rates_cmd, speed_cmd, clt_cmd,
                        rfluct_cmd, poisson_cmd, dump_path_cmd,
                        dump_coal_cmd}) {
    add_common_flags(cmd, opts, /*alpha_required=*/cmd != poisson_cmd);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints usage or message
    return e.get_exit_code() == 0 ? 0 : 2;
  }

  try {
    parse_tolerances(opts);

    if (constants_cmd->parsed()) {
      const betalab::Alpha alpha(opts.cfg.alpha);
      nlohmann::json j = betalab::detail::constants_json(alpha);
      j["alpha"] = alpha.value();
      j["version"] = betalab::kVersion;
      std::cout << j.dump(2) << "\n";
      return 0;
    }
    if (rates_cmd->parsed()) {
      const betalab::Alpha alpha(opts.cfg.alpha);
      const std::uint64_t b = opts.cfg.n_blocks > 0 ? opts.cfg.n_blocks : 10;
      const betalab::MergerLaw law = betalab::merger_law(b, alpha);
      nlohmann::json j{{"alpha", alpha.value()},
                       {"b", law.b},
                       {"total_rate", law.total_rate},
                       {"pmf", law.pmf},
                       {"version", betalab::kVersion}};
      std::cout << j.dump(2) << "\n";
      return 0;
    }
    if (speed_cmd->parsed()) {
      return emit_report(betalab::run_speed_experiment(opts.cfg));
    }
    if (clt_cmd->parsed()) {
      return emit_report(betalab::run_clt_experiment(opts.cfg));
    }
    if (rfluct_cmd->parsed()) {
      return emit_report(betalab::run_rfluct_experiment(opts.cfg));
    }
    if (poisson_cmd->parsed()) {
      if (opts.cfg.reps == 0) opts.cfg.reps = 1000;
      return emit_report(betalab::run_poisson_experiment(opts.cfg));
    }
    if (dump_path_cmd->parsed()) {
      dump_levy_path(opts);
      return 0;
    }
    if (dump_coal_cmd->parsed()) {
      dump_coalescent(opts);
      return 0;
    }
  } catch (const betalab::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
