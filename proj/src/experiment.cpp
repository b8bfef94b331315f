// SPDX-License-Identifier: Apache-2.0
#include "distilforge/experiment.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>

#include "distilforge/rng.hpp"

namespace distilforge {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kBlobsTestStream = 0x7e57;

// Typed field access that reports the dotted path on failure.
template <typename T>
T field(const json& obj, const std::string& key, const std::string& path,
        std::optional<T> fallback = std::nullopt) {
  const std::string where = path.empty() ? key : path + "." + key;
  if (!obj.is_object()) throw ConfigError(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) {
    if (fallback) return *fallback;
    throw ConfigError(where, "missing");
  }
  try {
    if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
      if (it->is_number_integer() && it->template get<long long>() < 0)
        throw ConfigError(where, "must be non-negative");
      if (!it->is_number_integer()) throw ConfigError(where, "expected an integer");
    }
    return it->template get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where, "has the wrong type");
  }
}

template <typename Fn>
void rethrow_as_config(const std::string& prefix, Fn&& fn) {
  try {
    fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    const auto colon = msg.find(": ");
    if (colon == std::string::npos) throw ConfigError(prefix, msg);
    throw ConfigError(prefix + "." + msg.substr(0, colon), msg.substr(colon + 2));
  }
}

fs::path resolve(const fs::path& base, const fs::path& p) {
  return p.is_absolute() || base.empty() ? p : base / p;
}

DatasetSpec parse_dataset(const json& j, const fs::path& base) {
  DatasetSpec d;
  const std::string kind = field<std::string>(j, "kind", "dataset", std::string("blobs"));
  d.normalize = field<bool>(j, "normalize", "dataset", true);
  d.num_classes = field<std::size_t>(j, "num_classes", "dataset", std::size_t{0});
  if (kind == "blobs") {
    d.kind = DatasetKind::blobs;
    d.blobs.num_classes = field<std::size_t>(j, "num_classes", "dataset", std::size_t{3});
    d.blobs.per_class = field<std::size_t>(j, "per_class", "dataset", std::size_t{100});
    d.blobs.dim = field<std::size_t>(j, "dim", "dataset", std::size_t{2});
    d.blobs.spread = field<double>(j, "spread", "dataset", 0.5);
    d.blobs.seed = field<std::uint64_t>(j, "seed", "dataset", std::uint64_t{0});
    d.test_per_class = field<std::size_t>(j, "test_per_class", "dataset", std::size_t{100});
    d.num_classes = d.blobs.num_classes;
    if (d.blobs.num_classes < 2) throw ConfigError("dataset.num_classes", "must be at least 2");
    if (d.blobs.per_class < 1) throw ConfigError("dataset.per_class", "must be at least 1");
    if (d.test_per_class < 1) throw ConfigError("dataset.test_per_class", "must be at least 1");
    if (d.blobs.dim < 2) throw ConfigError("dataset.dim", "must be at least 2");
    if (!(d.blobs.spread >= 0.0)) throw ConfigError("dataset.spread", "must be non-negative");
  } else if (kind == "idx") {
    d.kind = DatasetKind::idx;
    d.train_images = resolve(base, field<std::string>(j, "train_images", "dataset"));
    d.train_labels = resolve(base, field<std::string>(j, "train_labels", "dataset"));
    d.test_images = resolve(base, field<std::string>(j, "test_images", "dataset"));
    d.test_labels = resolve(base, field<std::string>(j, "test_labels", "dataset"));
  } else if (kind == "csv") {
    d.kind = DatasetKind::csv;
    d.train_csv = resolve(base, field<std::string>(j, "train", "dataset"));
    d.test_csv = resolve(base, field<std::string>(j, "test", "dataset"));
  } else {
    throw ConfigError("dataset.kind", "expected blobs, idx or csv");
  }
  return d;
}

NetworkConfig parse_network(const json& j, const std::string& path) {
  NetworkConfig c;
  c.input_dim = field<std::size_t>(j, "input_dim", path, std::size_t{0});
  c.num_classes = field<std::size_t>(j, "num_classes", path, std::size_t{0});
  c.init_seed = field<std::uint64_t>(j, "init_seed", path, std::uint64_t{0});
  try {
    c.hidden_dims = j.at("hidden_dims").get<std::vector<std::size_t>>();
  } catch (const json::exception&) {
    throw ConfigError(path + ".hidden_dims", "expected a list of positive integers");
  }
  // Dimensions left at zero are filled from the dataset later.
  NetworkConfig probe = c;
  if (probe.input_dim == 0) probe.input_dim = 1;
  if (probe.num_classes == 0) probe.num_classes = 2;
  rethrow_as_config(path, [&] { probe.validate(); });
  return c;
}

TrainConfig parse_train(const json& j) {
  TrainConfig t;
  const std::string p = "train";
  t.stage1_epochs = field<std::size_t>(j, "stage1_epochs", p, t.stage1_epochs);
  t.stage2_epochs = field<std::size_t>(j, "stage2_epochs", p, t.stage2_epochs);
  t.batch_size = field<std::size_t>(j, "batch_size", p, t.batch_size);
  t.lr = field<double>(j, "lr", p, t.lr);
  if (j.contains("lr_milestones")) {
    try {
      t.lr_milestones = j.at("lr_milestones").get<std::vector<std::size_t>>();
    } catch (const json::exception&) {
      throw ConfigError("train.lr_milestones", "expected a list of epochs");
    }
  }
  t.lr_factor = field<double>(j, "lr_factor", p, t.lr_factor);
  t.momentum = field<double>(j, "momentum", p, t.momentum);
  t.weight_decay = field<double>(j, "weight_decay", p, t.weight_decay);
  t.seed = field<std::uint64_t>(j, "seed", p, t.seed);
  rethrow_as_config(p, [&] {
    t.variant = parse_variant(field<std::string>(j, "variant", p, std::string("A")));
    t.update_order =
        parse_update_order(field<std::string>(j, "update_order", p, std::string("sequential")));
  });
  if (j.contains("weights")) {
    const json& w = j.at("weights");
    const std::string wp = "train.weights";
    t.weights.alpha = field<double>(w, "alpha", wp, t.weights.alpha);
    t.weights.beta = field<double>(w, "beta", wp, t.weights.beta);
    t.weights.gamma = field<double>(w, "gamma", wp, t.weights.gamma);
    t.weights.beta1 = field<double>(w, "beta1", wp, t.weights.beta1);
    t.weights.beta2 = field<double>(w, "beta2", wp, t.weights.beta2);
    t.weights.temperature = field<double>(w, "temperature", wp, t.weights.temperature);
  }
  rethrow_as_config(p, [&] {
    try {
      t.weights.validate();
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(std::string("weights.") + e.what());
    }
    t.validate();
  });
  return t;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void write_metrics(const fs::path& path, const std::vector<MetricsRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_metrics_csv(out, records);
}

// Output directories must not already hold results unless overwriting.
void prepare_output(const fs::path& out, bool overwrite,
                    const std::vector<std::string>& markers) {
  if (fs::exists(out) && !overwrite) {
    for (const auto& entry : fs::directory_iterator(out)) {
      const std::string name = entry.path().filename().string();
      for (const auto& m : markers) {
        if (name == m || (m.back() == '*' && name.rfind(m.substr(0, m.size() - 1), 0) == 0))
          throw ConfigError("output_dir", out.string() +
                                              " already holds run files; pass --overwrite");
      }
    }
  }
  fs::create_directories(out);
}

void fill_network_dims(std::array<NetworkConfig, 2>& nets, const Dataset& train) {
  for (std::size_t k = 0; k < 2; ++k) {
    const std::string path = "networks[" + std::to_string(k) + "]";
    if (nets[k].input_dim == 0) nets[k].input_dim = train.input_dim();
    if (nets[k].num_classes == 0) nets[k].num_classes = train.num_classes;
    if (nets[k].input_dim != train.input_dim())
      throw ConfigError(path + ".input_dim", "does not match dataset width " +
                                                 std::to_string(train.input_dim()));
    if (nets[k].num_classes != train.num_classes)
      throw ConfigError(path + ".num_classes", "does not match dataset class count " +
                                                   std::to_string(train.num_classes));
  }
}

json accuracy_json(const std::vector<SeedOutcome>& outcomes, int net) {
  json arr = json::array();
  for (const auto& o : outcomes) arr.push_back(o.final_test_top1[net]);
  return arr;
}

}  // namespace

ExperimentConfig parse_experiment_config(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw ConfigError("<root>", "expected a JSON object");
  ExperimentConfig c;
  c.dataset = parse_dataset(j.contains("dataset") ? j.at("dataset") : json::object(), base_dir);
  if (!j.contains("networks") || !j.at("networks").is_array() || j.at("networks").size() != 2)
    throw ConfigError("networks", "expected a list of exactly two network configs");
  for (std::size_t k = 0; k < 2; ++k)
    c.networks[k] = parse_network(j.at("networks")[k], "networks[" + std::to_string(k) + "]");
  c.train = parse_train(j.contains("train") ? j.at("train") : json::object());
  c.output_dir = field<std::string>(j, "output_dir", "", c.output_dir.string());
  c.seeds = field<std::size_t>(j, "seeds", "", std::size_t{1});
  if (c.seeds == 0) throw ConfigError("seeds", "must be at least 1");
  if (c.dataset.kind == DatasetKind::blobs) {
    for (std::size_t k = 0; k < 2; ++k) {
      const auto& n = c.networks[k];
      const std::string path = "networks[" + std::to_string(k) + "]";
      if (n.input_dim != 0 && n.input_dim != c.dataset.blobs.dim)
        throw ConfigError(path + ".input_dim", "does not match dataset.dim");
      if (n.num_classes != 0 && n.num_classes != c.dataset.blobs.num_classes)
        throw ConfigError(path + ".num_classes", "does not match dataset.num_classes");
    }
  }
  return c;
}

ExperimentConfig load_experiment_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", std::string("invalid JSON: ") + e.what());
  }
  return parse_experiment_config(j, path.parent_path());
}

json experiment_config_to_json(const ExperimentConfig& c) {
  json dataset;
  switch (c.dataset.kind) {
    case DatasetKind::blobs:
      dataset = {{"kind", "blobs"},
                 {"num_classes", c.dataset.blobs.num_classes},
                 {"per_class", c.dataset.blobs.per_class},
                 {"test_per_class", c.dataset.test_per_class},
                 {"dim", c.dataset.blobs.dim},
                 {"spread", c.dataset.blobs.spread},
                 {"seed", c.dataset.blobs.seed}};
      break;
    case DatasetKind::idx:
      dataset = {{"kind", "idx"},
                 {"train_images", c.dataset.train_images.string()},
                 {"train_labels", c.dataset.train_labels.string()},
                 {"test_images", c.dataset.test_images.string()},
                 {"test_labels", c.dataset.test_labels.string()},
                 {"num_classes", c.dataset.num_classes}};
      break;
    case DatasetKind::csv:
      dataset = {{"kind", "csv"},
                 {"train", c.dataset.train_csv.string()},
                 {"test", c.dataset.test_csv.string()},
                 {"num_classes", c.dataset.num_classes}};
      break;
  }
  dataset["normalize"] = c.dataset.normalize;
  const auto& t = c.train;
  json train = {{"stage1_epochs", t.stage1_epochs},
                {"stage2_epochs", t.stage2_epochs},
                {"batch_size", t.batch_size},
                {"lr", t.lr},
                {"lr_milestones", t.lr_milestones},
                {"lr_factor", t.lr_factor},
                {"momentum", t.momentum},
                {"weight_decay", t.weight_decay},
                {"seed", t.seed},
                {"variant", std::string(to_string(t.variant))},
                {"update_order", std::string(to_string(t.update_order))},
                {"weights",
                 {{"alpha", t.weights.alpha},
                  {"beta", t.weights.beta},
                  {"gamma", t.weights.gamma},
                  {"beta1", t.weights.beta1},
                  {"beta2", t.weights.beta2},
                  {"temperature", t.weights.temperature}}}};
  return {{"dataset", dataset},
          {"networks", {config_to_json(c.networks[0]), config_to_json(c.networks[1])}},
          {"train", train},
          {"output_dir", c.output_dir.string()},
          {"seeds", c.seeds}};
}

void apply_seed_override(ExperimentConfig& config, const char* env_value) {
  if (env_value == nullptr || *env_value == '\0') return;
  std::uint64_t seed = 0;
  const char* end = env_value + std::strlen(env_value);
  const auto [ptr, ec] = std::from_chars(env_value, end, seed);
  if (ec != std::errc() || ptr != end)
    throw ConfigError("DISTILFORGE_SEED", "expected a non-negative integer");
  config.train.seed = seed;
}

SplitData load_datasets(const DatasetSpec& spec) {
  Dataset train, test;
  switch (spec.kind) {
    case DatasetKind::blobs: {
      train = synth_blobs(spec.blobs);
      BlobsSpec t = spec.blobs;
      t.per_class = spec.test_per_class;
      t.seed = derive_seed(spec.blobs.seed, {kBlobsTestStream});
      test = synth_blobs(t);
      train.name = "blobs-train";
      test.name = "blobs-test";
      break;
    }
    case DatasetKind::idx:
      train = load_idx(spec.train_images, spec.train_labels, spec.num_classes);
      test = load_idx(spec.test_images, spec.test_labels, spec.num_classes);
      break;
    case DatasetKind::csv:
      train = load_csv(spec.train_csv, spec.num_classes);
      test = load_csv(spec.test_csv, spec.num_classes);
      break;
  }
  if (train.input_dim() != test.input_dim())
    throw DataError("train and test feature widths differ");
  // Class counts inferred per file may differ; use the larger.
  const std::size_t m = std::max(train.num_classes, test.num_classes);
  train.num_classes = test.num_classes = m;
  if (!spec.normalize) return {std::move(train), std::move(test)};
  const std::array<Dataset, 1> others{test};
  auto [normalized, stats] = mean_std_normalize(train, others);
  return {std::move(normalized[0]), std::move(normalized[1])};
}

std::array<NetworkConfig, 2> seeded_networks(const ExperimentConfig& config,
                                             std::uint64_t run_seed) {
  std::array<NetworkConfig, 2> nets = config.networks;
  for (auto& n : nets) n.init_seed = derive_seed(run_seed, {n.init_seed});
  return nets;
}

std::pair<double, double> mean_stddev(const std::vector<double>& values) {
  if (values.empty()) return {0.0, 0.0};
  double m = 0.0;
  for (double v : values) m += v;
  m /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - m) * (v - m);
  return {m, std::sqrt(var / static_cast<double>(values.size()))};
}

RunSummary run_experiment(const ExperimentConfig& config, const fs::path& out, bool overwrite) {
  prepare_output(out, overwrite, {"summary.json", "seed_*"});
  SplitData data = load_datasets(config.dataset);
  ExperimentConfig cfg = config;
  fill_network_dims(cfg.networks, data.train);

  RunSummary summary;
  json converged = json::array();
  for (std::size_t r = 0; r < cfg.seeds; ++r) {
    TrainConfig train = cfg.train;
    train.seed = cfg.train.seed + r;
    const auto net_cfgs = seeded_networks(cfg, train.seed);
    PeerPair nets{PeerNetwork(net_cfgs[0]), PeerNetwork(net_cfgs[1])};

    const fs::path dir = out / ("seed_" + std::to_string(train.seed));
    fs::create_directories(dir);

    Stage1Result s1 = pretrain_stage1(nets, data.train, data.test, train);
    for (int k = 0; k < 2; ++k)
      save_checkpoint(dir / ("net" + std::to_string(k + 1) + "_stage1.json"), nets[k]);
    auto s2 = train_stage2(nets, s1.snapshots, data.train, data.test, train);
    for (int k = 0; k < 2; ++k)
      save_checkpoint(dir / ("net" + std::to_string(k + 1) + "_stage2.json"), nets[k]);

    SeedOutcome outcome;
    outcome.seed = train.seed;
    outcome.metrics = std::move(s1.metrics);
    outcome.metrics.insert(outcome.metrics.end(), s2.begin(), s2.end());
    for (int k = 0; k < 2; ++k) outcome.final_test_top1[k] = evaluate_top1(nets[k], data.test);
    write_metrics(dir / "metrics.csv", outcome.metrics);
    converged.push_back({{"seed", train.seed}, {"net1", s1.converged[0]}, {"net2", s1.converged[1]}});
    summary.outcomes.push_back(std::move(outcome));
  }

  json j;
  j["seeds"] = json::array();
  for (const auto& o : summary.outcomes) j["seeds"].push_back(o.seed);
  for (int k = 0; k < 2; ++k) {
    std::vector<double> acc;
    for (const auto& o : summary.outcomes) acc.push_back(o.final_test_top1[k]);
    std::tie(summary.mean[k], summary.stddev[k]) = mean_stddev(acc);
    const std::string key = "net" + std::to_string(k + 1);
    j["final_test_top1"][key] = accuracy_json(summary.outcomes, k);
    j["mean"][key] = summary.mean[k];
    j["stddev"][key] = summary.stddev[k];
  }
  j["stddev_kind"] = "population";
  j["stage1_converged"] = converged;
  j["config"] = experiment_config_to_json(cfg);
  write_text(out / "summary.json", j.dump(2) + "\n");
  return summary;
}

AblationResult run_ablation(const ExperimentConfig& config, const fs::path& out, bool overwrite) {
  prepare_output(out, overwrite, {"ablation.csv", "ablation_summary.json", "stage1", "variant_*"});
  SplitData data = load_datasets(config.dataset);
  ExperimentConfig cfg = config;
  fill_network_dims(cfg.networks, data.train);

  constexpr std::array<Variant, 4> kVariants{Variant::A, Variant::B, Variant::C, Variant::D};
  std::array<std::array<std::vector<double>, 2>, 4> acc;

  for (std::size_t r = 0; r < cfg.seeds; ++r) {
    TrainConfig train = cfg.train;
    train.seed = cfg.train.seed + r;
    const auto net_cfgs = seeded_networks(cfg, train.seed);
    PeerPair pretrained{PeerNetwork(net_cfgs[0]), PeerNetwork(net_cfgs[1])};
    Stage1Result s1 = pretrain_stage1(pretrained, data.train, data.test, train);

    const fs::path s1_dir = out / "stage1" / ("seed_" + std::to_string(train.seed));
    fs::create_directories(s1_dir);
    for (int k = 0; k < 2; ++k)
      save_checkpoint(s1_dir / ("net" + std::to_string(k + 1) + "_stage1.json"), pretrained[k]);

    for (std::size_t v = 0; v < kVariants.size(); ++v) {
      TrainConfig vt = train;
      vt.variant = kVariants[v];
      PeerPair nets{pretrained[0].clone(), pretrained[1].clone()};
      auto s2 = train_stage2(nets, s1.snapshots, data.train, data.test, vt);
      std::vector<MetricsRecord> rows = s1.metrics;
      rows.insert(rows.end(), s2.begin(), s2.end());
      const fs::path dir = out / ("variant_" + std::string(to_string(kVariants[v]))) /
                           ("seed_" + std::to_string(train.seed));
      fs::create_directories(dir);
      write_metrics(dir / "metrics.csv", rows);
      for (int k = 0; k < 2; ++k) acc[v][k].push_back(evaluate_top1(nets[k], data.test));
    }
  }

  AblationResult result;
  std::array<double, 4> variant_mean{};
  for (std::size_t v = 0; v < kVariants.size(); ++v) {
    for (int k = 0; k < 2; ++k) {
      const auto [m, s] = mean_stddev(acc[v][k]);
      result.rows.push_back({kVariants[v], k + 1, m, s, acc[v][k].size()});
      variant_mean[v] += m / 2.0;
    }
  }
  // Drops are measured from variant A. A tie shows no ordering, so B must
  // fall strictly below both C and D and strictly below A.
  result.b_largest_drop = variant_mean[1] < variant_mean[0] && variant_mean[1] < variant_mean[2] &&
                          variant_mean[1] < variant_mean[3];
  result.status = result.b_largest_drop ? "pass" : "warn";

  std::ofstream csv(out / "ablation.csv", std::ios::binary);
  csv << "variant,net,mean_test_top1,std_test_top1,seeds\n";
  char buf[128];
  for (const auto& row : result.rows) {
    std::snprintf(buf, sizeof buf, "%s,%d,%.9g,%.9g,%zu\n", std::string(to_string(row.variant)).c_str(),
                  row.net, row.mean, row.stddev, row.seeds);
    csv << buf;
  }

  json j;
  for (std::size_t v = 0; v < kVariants.size(); ++v)
    j["variant_mean_test_top1"][std::string(to_string(kVariants[v]))] = variant_mean[v];
  j["b_largest_drop"] = result.b_largest_drop;
  j["status"] = result.status;
  j["seeds"] = cfg.seeds;
  j["config"] = experiment_config_to_json(cfg);
  write_text(out / "ablation_summary.json", j.dump(2) + "\n");
  return result;
}

}  // namespace distilforge
