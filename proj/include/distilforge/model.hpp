// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "distilforge/tensor.hpp"
#include <json.hpp>

namespace distilforge {

/// Shape of a ReLU MLP peer. The last hidden layer is the embedding.
struct NetworkConfig {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden_dims;
  std::size_t num_classes = 0;
  std::uint64_t init_seed = 0;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
  std::size_t embedding_dim() const { return hidden_dims.back(); }
  std::size_t parameter_count() const;

  bool operator==(const NetworkConfig&) const = default;
};

enum class NetworkMode { training, frozen };

struct ForwardOutput {
  Tensor embedding;  // [batch x d], last hidden activation
  Tensor logits;     // [batch x m], unnormalized
};

struct NamedParameter {
  std::string name;
  Tensor value;
};

class PeerNetwork {
 public:
  /// Glorot-uniform weights drawn from config.init_seed, zero biases.
  explicit PeerNetwork(NetworkConfig config);

  PeerNetwork(PeerNetwork&&) noexcept = default;
  PeerNetwork& operator=(PeerNetwork&&) noexcept = default;
  // Parameters are shared handles; copies must be explicit.
  PeerNetwork(const PeerNetwork&) = delete;
  PeerNetwork& operator=(const PeerNetwork&) = delete;

  ForwardOutput forward(const Tensor& features) const;

  /// Deep copy in frozen mode. Later updates to this network do not reach it.
  PeerNetwork snapshot() const;
  /// Deep copy that keeps the current mode.
  PeerNetwork clone() const;

  const NetworkConfig& config() const { return config_; }
  NetworkMode mode() const { return mode_; }

  std::vector<NamedParameter>& parameters() { return params_; }
  const std::vector<NamedParameter>& parameters() const { return params_; }
  const Tensor& parameter(const std::string& name) const;
  Tensor& parameter(const std::string& name);

  void zero_grad();

  /// Builds a network from explicit parameter values (checkpoint loading).
  static PeerNetwork from_parameters(NetworkConfig config,
                                     std::vector<NamedParameter> params,
                                     NetworkMode mode = NetworkMode::training);

 private:
  PeerNetwork(NetworkConfig config, std::vector<NamedParameter> params, NetworkMode mode);

  NetworkConfig config_;
  std::vector<NamedParameter> params_;
  NetworkMode mode_ = NetworkMode::training;
};

/// Parameter names and shapes implied by a config, in forward order.
std::vector<std::pair<std::string, Shape>> parameter_layout(const NetworkConfig& config);

/// True when both networks hold bit-identical parameter data.
bool same_parameters(const PeerNetwork& a, const PeerNetwork& b);

// ---- checkpoints -----------------------------------------------------------

nlohmann::json config_to_json(const NetworkConfig& config);
NetworkConfig config_from_json(const nlohmann::json& j);

/// {"config": {...}, "parameters": {name: {"shape": [...], "data": [...]}}}
nlohmann::json checkpoint_to_json(const PeerNetwork& net);
PeerNetwork checkpoint_from_json(const nlohmann::json& j);

void save_checkpoint(const std::filesystem::path& path, const PeerNetwork& net);
PeerNetwork load_checkpoint(const std::filesystem::path& path);

}  // namespace distilforge
