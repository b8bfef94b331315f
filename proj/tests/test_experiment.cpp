// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <cstdio>

#include <gtest/gtest.h>

#include "distilforge/experiment.hpp"
#include "support.hpp"

using namespace distilforge;
using nlohmann::json;
namespace fs = std::filesystem;
namespace dt = distilforge::testing;

namespace {

struct CommandResult {
  int code;
  std::string output;
};

CommandResult cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + DISTILFORGE_CLI + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  std::string out;
  char buf[512];
  while (std::fgets(buf, sizeof buf, pipe)) out += buf;
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

json small_experiment(std::size_t seeds) {
  json j = dt::blobs_experiment(seeds);
  j["dataset"]["per_class"] = 20;
  j["dataset"]["test_per_class"] = 20;
  j["train"]["stage1_epochs"] = 2;
  j["train"]["stage2_epochs"] = 3;
  j["train"]["lr_milestones"] = {2};
  return j;
}

fs::path write_config(const std::string& name, const json& j) {
  const fs::path dir = dt::scratch_dir(name);
  dt::write_file(dir / "cfg.json", j.dump(2));
  return dir;
}

}  // namespace

TEST(Config, ParsesDefaultsAndRoundTrips) {
  const ExperimentConfig c = parse_experiment_config(small_experiment(2));
  EXPECT_EQ(c.seeds, 2u);
  EXPECT_EQ(c.train.stage2_epochs, 3u);
  EXPECT_EQ(c.train.weights.gamma, 0.6);
  EXPECT_EQ(c.networks[1].hidden_dims, (std::vector<std::size_t>{12, 8}));
  const ExperimentConfig back = parse_experiment_config(experiment_config_to_json(c));
  EXPECT_EQ(experiment_config_to_json(back), experiment_config_to_json(c));
}

TEST(Config, ErrorsNameTheField) {
  auto field_of = [](json j) {
    try {
      parse_experiment_config(j);
    } catch (const ConfigError& e) {
      return e.field();
    }
    return std::string("<none>");
  };
  json j = small_experiment(1);
  j["train"]["lr"] = -0.1;
  EXPECT_EQ(field_of(j), "train.lr");
  j = small_experiment(1);
  j["train"]["batch_size"] = "big";
  EXPECT_EQ(field_of(j), "train.batch_size");
  j = small_experiment(1);
  j["networks"][0]["hidden_dims"] = json::array();
  EXPECT_EQ(field_of(j), "networks[0].hidden_dims");
  j = small_experiment(1);
  j["networks"][1]["input_dim"] = 5;
  EXPECT_EQ(field_of(j), "networks[1].input_dim");
  j = small_experiment(1);
  j["train"]["weights"]["temperature"] = 0;
  EXPECT_EQ(field_of(j), "train.weights.temperature");
  j = small_experiment(1);
  j["seeds"] = 0;
  EXPECT_EQ(field_of(j), "seeds");
  j = small_experiment(1);
  j["train"]["variant"] = "Z";
  EXPECT_EQ(field_of(j), "train.variant");
  j = small_experiment(1);
  j["networks"].erase(1);
  EXPECT_EQ(field_of(j), "networks");
}

TEST(Config, SeedOverride) {
  ExperimentConfig c = parse_experiment_config(small_experiment(1));
  apply_seed_override(c, "42");
  EXPECT_EQ(c.train.seed, 42u);
  apply_seed_override(c, nullptr);
  EXPECT_EQ(c.train.seed, 42u);
  EXPECT_THROW(apply_seed_override(c, "4x"), ConfigError);
  EXPECT_THROW(apply_seed_override(c, "-1"), ConfigError);
}

TEST(Statistics, PopulationStddev) {
  const auto [m, s] = mean_stddev({1.0, 2.0, 3.0});
  EXPECT_EQ(m, 2.0);
  EXPECT_DOUBLE_EQ(s, std::sqrt(2.0 / 3.0));
}

TEST(Cli, RunWritesMetricsAndCheckpoints) {
  const fs::path dir = write_config("cli_run", small_experiment(1));
  const CommandResult r = cli("run " + (dir / "cfg.json").string() + " --out " + (dir / "out").string());
  ASSERT_EQ(r.code, 0) << r.output;
  const fs::path seed = dir / "out" / "seed_0";
  EXPECT_TRUE(fs::exists(seed / "metrics.csv"));
  for (const char* f : {"net1_stage1.json", "net2_stage1.json", "net1_stage2.json", "net2_stage2.json"})
    EXPECT_NO_THROW(load_checkpoint(seed / f)) << f;
  const std::string csv = dt::read_file(seed / "metrics.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 2 * (2 + 3));
}

TEST(Cli, ThreeSeedSummary) {
  const fs::path dir = write_config("cli_summary", small_experiment(3));
  ASSERT_EQ(cli("run " + (dir / "cfg.json").string() + " --out " + (dir / "out").string()).code, 0);
  const json s = json::parse(dt::read_file(dir / "out" / "summary.json"));
  EXPECT_EQ(s.at("seeds").size(), 3u);
  for (const char* net : {"net1", "net2"}) {
    const auto acc = s.at("final_test_top1").at(net).get<std::vector<double>>();
    ASSERT_EQ(acc.size(), 3u);
    const auto [m, sd] = mean_stddev(acc);
    EXPECT_DOUBLE_EQ(s.at("mean").at(net).get<double>(), m);
    EXPECT_DOUBLE_EQ(s.at("stddev").at(net).get<double>(), sd);
  }
}

TEST(Cli, RefusesToOverwriteWithoutFlag) {
  const fs::path dir = write_config("cli_overwrite", small_experiment(1));
  const std::string args = "run " + (dir / "cfg.json").string() + " --out " + (dir / "out").string();
  ASSERT_EQ(cli(args).code, 0);
  const CommandResult again = cli(args);
  EXPECT_EQ(again.code, 1);
  EXPECT_NE(again.output.find("--overwrite"), std::string::npos);
  EXPECT_EQ(cli(args + " --overwrite").code, 0);
}

TEST(Cli, NegativeLearningRateExitsOneNamingLr) {
  json j = small_experiment(1);
  j["train"]["lr"] = -0.5;
  const fs::path dir = write_config("cli_badlr", j);
  const CommandResult r = cli("run " + (dir / "cfg.json").string() + " --out " + (dir / "out").string());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.output.find("lr"), std::string::npos);
  EXPECT_EQ(std::count(r.output.begin(), r.output.end(), '\n'), 1) << r.output;
  EXPECT_EQ(r.output.rfind("error: ", 0), 0u);
}

TEST(Cli, MissingConfigExitsOne) {
  EXPECT_EQ(cli("run /nonexistent/cfg.json").code, 1);
  EXPECT_EQ(cli("").code, 1);
}

TEST(Cli, DivergenceExitsTwo) {
  json j = small_experiment(1);
  j["train"]["lr"] = 1e200;
  j["train"]["momentum"] = 0.0;
  const fs::path dir = write_config("cli_diverge", j);
  const CommandResult r = cli("run " + (dir / "cfg.json").string() + " --out " + (dir / "out").string());
  EXPECT_EQ(r.code, 2) << r.output;
  EXPECT_NE(r.output.find("diverged"), std::string::npos);
}

TEST(Cli, SeedEnvironmentOverride) {
  const fs::path dir = write_config("cli_seed", small_experiment(1));
  const std::string base = "run " + (dir / "cfg.json").string() + " --out ";
  ASSERT_EQ(cli(base + (dir / "a").string(), "DISTILFORGE_SEED=5").code, 0);
  ASSERT_EQ(cli(base + (dir / "b").string()).code, 0);
  EXPECT_TRUE(fs::exists(dir / "a" / "seed_5" / "metrics.csv"));
  EXPECT_TRUE(fs::exists(dir / "b" / "seed_0" / "metrics.csv"));
  EXPECT_EQ(cli(base + (dir / "c").string(), "DISTILFORGE_SEED=abc").code, 1);
}

TEST(Cli, AblationTable) {
  const fs::path dir = write_config("cli_ablate", small_experiment(2));
  const CommandResult r = cli("ablate " + (dir / "cfg.json").string() + " --out " + (dir / "out").string());
  ASSERT_EQ(r.code, 0) << r.output;
  const std::string csv = dt::read_file(dir / "out" / "ablation.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "variant,net,mean_test_top1,std_test_top1,seeds");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 9);
  const json s = json::parse(dt::read_file(dir / "out" / "ablation_summary.json"));
  const std::string status = s.at("status");
  EXPECT_TRUE(status == "pass" || status == "warn");
  for (const char* v : {"A", "B", "C", "D"})
    EXPECT_TRUE(fs::exists(dir / "out" / ("variant_" + std::string(v)) / "seed_1" / "metrics.csv"));
}

TEST(Cli, VerifyPassesAndCatchesHuberMutant) {
  EXPECT_EQ(cli("verify").code, 0);
  const CommandResult bad = cli("verify --inject-fault huber");
  EXPECT_EQ(bad.code, 3);
  EXPECT_NE(bad.output.find("error: verify: property 'huber values' failed"), std::string::npos);
}
