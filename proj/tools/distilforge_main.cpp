// SPDX-License-Identifier: Apache-2.0
//
// distilforge run <config.json> [--overwrite] [--out DIR]
// distilforge ablate <config.json> [--overwrite] [--out DIR]
// distilforge verify [--inject-fault NAME]
//
// Exit codes: 0 ok, 1 config or data error, 2 divergence, 3 verify failure,
// 4 other runtime error.
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "distilforge/data.hpp"
#include "distilforge/experiment.hpp"
#include "distilforge/trainer.hpp"
#include "distilforge/verify.hpp"

namespace fs = std::filesystem;
using namespace distilforge;

namespace {

enum Exit { kOk = 0, kConfig = 1, kDiverged = 2, kVerifyFailed = 3, kRuntime = 4 };

int fail(int code, const std::string& what) {
  std::string line = what;
  for (char& c : line)
    if (c == '\n' || c == '\r') c = ' ';
  std::cerr << "error: " << line << "\n";
  return code;
}

ExperimentConfig prepare(const std::string& config_path, const std::string& out_flag,
                         fs::path& out) {
  ExperimentConfig cfg = load_experiment_config(config_path);
  apply_seed_override(cfg, std::getenv("DISTILFORGE_SEED"));
  out = out_flag.empty() ? cfg.output_dir : fs::path(out_flag);
  return cfg;
}

int cmd_run(const std::string& config_path, const std::string& out_flag, bool overwrite) {
  fs::path out;
  const ExperimentConfig cfg = prepare(config_path, out_flag, out);
  const RunSummary s = run_experiment(cfg, out, overwrite);
  for (const auto& o : s.outcomes)
    std::printf("seed %llu: net1 %.4f net2 %.4f\n", static_cast<unsigned long long>(o.seed),
                o.final_test_top1[0], o.final_test_top1[1]);
  std::printf("mean: net1 %.4f +- %.4f, net2 %.4f +- %.4f\n", s.mean[0], s.stddev[0], s.mean[1],
              s.stddev[1]);
  std::printf("wrote %s\n", (out / "summary.json").string().c_str());
  return kOk;
}

int cmd_ablate(const std::string& config_path, const std::string& out_flag, bool overwrite) {
  fs::path out;
  const ExperimentConfig cfg = prepare(config_path, out_flag, out);
  const AblationResult r = run_ablation(cfg, out, overwrite);
  for (const auto& row : r.rows)
    std::printf("variant %s net%d: %.4f +- %.4f (%zu seeds)\n",
                std::string(to_string(row.variant)).c_str(), row.net, row.mean, row.stddev,
                row.seeds);
  if (!r.b_largest_drop)
    std::fprintf(stderr, "warning: removing self-distillation was not the largest drop\n");
  std::printf("status: %s\nwrote %s\n", r.status.c_str(), (out / "ablation.csv").string().c_str());
  return kOk;
}

int cmd_verify(const std::string& fault) {
  const auto results = run_verification(verify_options(fault));
  int failed = 0;
  for (const auto& r : results) {
    std::printf("%s  %s: %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
    if (!r.passed) ++failed;
  }
  if (failed) {
    for (const auto& r : results)
      if (!r.passed) return fail(kVerifyFailed, "verify: property '" + r.name + "' failed");
  }
  std::printf("all %zu checks passed\n", results.size());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-peer mutual and relational distillation trainer"};
  app.require_subcommand(1);

  std::string config_path, out_flag, fault;
  bool overwrite = false;

  auto* run = app.add_subcommand("run", "Train both peers for every seed repetition");
  run->add_option("config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--out", out_flag, "Output directory (default: config output_dir)");
  run->add_flag("--overwrite", overwrite, "Replace an existing run in the output directory");

  auto* ablate = app.add_subcommand("ablate", "Run variants A-D and tabulate accuracies");
  ablate->add_option("config", config_path, "Experiment config (JSON)")->required();
  ablate->add_option("--out", out_flag, "Output directory (default: config output_dir)");
  ablate->add_flag("--overwrite", overwrite, "Replace an existing ablation");

  auto* verify = app.add_subcommand("verify", "Run the built-in invariant checks");
  verify->add_option("--inject-fault", fault, "Swap in a known-bad component (huber)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return fail(kConfig, std::string("usage: ") + e.what());
  }

  try {
    if (*run) return cmd_run(config_path, out_flag, overwrite);
    if (*ablate) return cmd_ablate(config_path, out_flag, overwrite);
    return cmd_verify(fault);
  } catch (const ConfigError& e) {
    return fail(kConfig, std::string("config: ") + e.what());
  } catch (const DataError& e) {
    return fail(kConfig, std::string("data: ") + e.what());
  } catch (const DivergenceError& e) {
    return fail(kDiverged, std::string("diverged: ") + e.what());
  } catch (const std::invalid_argument& e) {
    return fail(kConfig, std::string("config: ") + e.what());
  } catch (const std::exception& e) {
    return fail(kRuntime, e.what());
  }
}
