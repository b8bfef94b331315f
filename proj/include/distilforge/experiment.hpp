// SPDX-License-Identifier: Apache-2.0
//
// Experiment configs and the run / ablate drivers behind the CLI.
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "distilforge/data.hpp"
#include "distilforge/model.hpp"
#include "distilforge/trainer.hpp"

namespace distilforge {

/// Invalid or unusable configuration. `field()` is the dotted JSON path.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& why)
      : std::invalid_argument(field + ": " + why), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

enum class DatasetKind { blobs, idx, csv };

struct DatasetSpec {
  DatasetKind kind = DatasetKind::blobs;
  BlobsSpec blobs;                   // train split for kind == blobs
  std::size_t test_per_class = 100;  // blobs test split size
  std::filesystem::path train_images, train_labels, test_images, test_labels;  // idx
  std::filesystem::path train_csv, test_csv;                                   // csv
  std::size_t num_classes = 0;       // 0: inferred from labels (idx/csv)
  bool normalize = true;
};

struct ExperimentConfig {
  DatasetSpec dataset;
  std::array<NetworkConfig, 2> networks;
  TrainConfig train;
  std::filesystem::path output_dir = "runs/default";
  std::size_t seeds = 1;
};

/// Parses and validates. Relative dataset paths resolve against `base_dir`.
ExperimentConfig parse_experiment_config(const nlohmann::json& j,
                                         const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
nlohmann::json experiment_config_to_json(const ExperimentConfig& config);

/// Integer override for train.seed, as read from DISTILFORGE_SEED.
void apply_seed_override(ExperimentConfig& config, const char* env_value);

struct SplitData {
  Dataset train;
  Dataset test;
};

/// Loads the configured splits and applies train-statistics normalization.
SplitData load_datasets(const DatasetSpec& spec);

/// Network configs used for one repetition: init seeds mixed with the run seed.
std::array<NetworkConfig, 2> seeded_networks(const ExperimentConfig& config,
                                             std::uint64_t run_seed);

struct SeedOutcome {
  std::uint64_t seed = 0;
  std::array<double, 2> final_test_top1{0.0, 0.0};
  std::vector<MetricsRecord> metrics;
};

struct RunSummary {
  std::vector<SeedOutcome> outcomes;
  std::array<double, 2> mean{0.0, 0.0};
  std::array<double, 2> stddev{0.0, 0.0};  // population
};

/// Mean and population standard deviation.
std::pair<double, double> mean_stddev(const std::vector<double>& values);

/// Stage 1 then stage 2 for each seed repetition. Writes, under `out`:
/// seed_<s>/metrics.csv, seed_<s>/net{1,2}_stage{1,2}.json, summary.json.
/// Refuses to touch existing run files unless `overwrite`.
RunSummary run_experiment(const ExperimentConfig& config, const std::filesystem::path& out,
                          bool overwrite);

struct AblationRow {
  Variant variant = Variant::A;
  int net = 1;
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t seeds = 0;
};

struct AblationResult {
  std::vector<AblationRow> rows;     // 4 variants x 2 nets
  bool b_largest_drop = false;       // variant B mean strictly below A, C and D
  std::string status;                // "pass" or "warn"
};

/// Runs variants A-D from shared stage-one results per seed. Writes
/// ablation.csv, ablation_summary.json, stage1/seed_<s>/ checkpoints and
/// variant_<V>/seed_<s>/metrics.csv under `out`.
AblationResult run_ablation(const ExperimentConfig& config, const std::filesystem::path& out,
                            bool overwrite);

}  // namespace distilforge
