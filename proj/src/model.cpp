// SPDX-License-Identifier: Apache-2.0
#include "distilforge/model.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "distilforge/rng.hpp"

namespace distilforge {

namespace {

void fail(const std::string& field, const std::string& why) {
  throw std::invalid_argument(field + ": " + why);
}

}  // namespace

void NetworkConfig::validate() const {
  if (input_dim == 0) fail("input_dim", "must be positive");
  if (hidden_dims.empty()) fail("hidden_dims", "needs at least one layer");
  for (std::size_t h : hidden_dims)
    if (h == 0) fail("hidden_dims", "layer widths must be positive");
  if (hidden_dims.back() < 2) fail("hidden_dims", "embedding width must be at least 2");
  if (num_classes < 2) fail("num_classes", "must be at least 2");
}

std::size_t NetworkConfig::parameter_count() const {
  std::size_t total = 0;
  for (const auto& [name, shape] : parameter_layout(*this)) total += shape_numel(shape);
  return total;
}

std::vector<std::pair<std::string, Shape>> parameter_layout(const NetworkConfig& config) {
  std::vector<std::pair<std::string, Shape>> layout;
  std::size_t fan_in = config.input_dim;
  for (std::size_t i = 0; i < config.hidden_dims.size(); ++i) {
    const std::size_t fan_out = config.hidden_dims[i];
    const std::string prefix = "hidden." + std::to_string(i);
    layout.emplace_back(prefix + ".weight", Shape{fan_in, fan_out});
    layout.emplace_back(prefix + ".bias", Shape{fan_out});
    fan_in = fan_out;
  }
  layout.emplace_back("classifier.weight", Shape{fan_in, config.num_classes});
  layout.emplace_back("classifier.bias", Shape{config.num_classes});
  return layout;
}

PeerNetwork::PeerNetwork(NetworkConfig config) : config_(std::move(config)) {
  config_.validate();
  Rng rng(config_.init_seed);
  for (auto& [name, shape] : parameter_layout(config_)) {
    std::vector<double> values(shape_numel(shape), 0.0);
    if (shape.size() == 2) {
      const double limit = std::sqrt(6.0 / static_cast<double>(shape[0] + shape[1]));
      for (double& v : values) v = rng.uniform(-limit, limit);
    }
    params_.push_back({name, Tensor::from(shape, std::move(values), true)});
  }
}

PeerNetwork::PeerNetwork(NetworkConfig config, std::vector<NamedParameter> params,
                         NetworkMode mode)
    : config_(std::move(config)), params_(std::move(params)), mode_(mode) {}

PeerNetwork PeerNetwork::from_parameters(NetworkConfig config, std::vector<NamedParameter> params,
                                         NetworkMode mode) {
  config.validate();
  const auto layout = parameter_layout(config);
  if (params.size() != layout.size())
    throw std::invalid_argument("parameters: expected " + std::to_string(layout.size()) +
                                " tensors, got " + std::to_string(params.size()));
  std::vector<NamedParameter> ordered;
  for (const auto& [name, shape] : layout) {
    auto it = std::find_if(params.begin(), params.end(),
                           [&](const NamedParameter& p) { return p.name == name; });
    if (it == params.end()) throw std::invalid_argument("parameters: missing " + name);
    if (it->value.shape() != shape)
      throw std::invalid_argument("parameters: " + name + " has shape " +
                                  shape_string(it->value.shape()) + ", expected " +
                                  shape_string(shape));
    ordered.push_back({name, it->value.clone(mode == NetworkMode::training)});
  }
  return PeerNetwork(std::move(config), std::move(ordered), mode);
}

ForwardOutput PeerNetwork::forward(const Tensor& features) const {
  if (features.rank() != 2 || features.cols() != config_.input_dim)
    throw ShapeError("forward: expected feature width " + std::to_string(config_.input_dim) +
                     ", got shape " + shape_string(features.shape()));
  Tensor h = features;
  const std::size_t layers = config_.hidden_dims.size();
  for (std::size_t i = 0; i < layers; ++i)
    h = relu(add_row_vector(matmul(h, params_[2 * i].value), params_[2 * i + 1].value));
  Tensor logits =
      add_row_vector(matmul(h, params_[2 * layers].value), params_[2 * layers + 1].value);
  return {std::move(h), std::move(logits)};
}

PeerNetwork PeerNetwork::snapshot() const {
  std::vector<NamedParameter> copy;
  copy.reserve(params_.size());
  for (const auto& p : params_) copy.push_back({p.name, p.value.clone(false)});
  return PeerNetwork(config_, std::move(copy), NetworkMode::frozen);
}

PeerNetwork PeerNetwork::clone() const {
  std::vector<NamedParameter> copy;
  copy.reserve(params_.size());
  for (const auto& p : params_)
    copy.push_back({p.name, p.value.clone(mode_ == NetworkMode::training)});
  return PeerNetwork(config_, std::move(copy), mode_);
}

const Tensor& PeerNetwork::parameter(const std::string& name) const {
  for (const auto& p : params_)
    if (p.name == name) return p.value;
  throw std::out_of_range("no parameter named " + name);
}

Tensor& PeerNetwork::parameter(const std::string& name) {
  for (auto& p : params_)
    if (p.name == name) return p.value;
  throw std::out_of_range("no parameter named " + name);
}

void PeerNetwork::zero_grad() {
  for (auto& p : params_) p.value.zero_grad();
}

bool same_parameters(const PeerNetwork& a, const PeerNetwork& b) {
  if (a.parameters().size() != b.parameters().size()) return false;
  for (std::size_t i = 0; i < a.parameters().size(); ++i) {
    const auto x = a.parameters()[i].value.data();
    const auto y = b.parameters()[i].value.data();
    if (x.size() != y.size()) return false;
    for (std::size_t j = 0; j < x.size(); ++j)
      if (std::bit_cast<std::uint64_t>(x[j]) != std::bit_cast<std::uint64_t>(y[j])) return false;
  }
  return true;
}

// ---- checkpoints -----------------------------------------------------------

nlohmann::json config_to_json(const NetworkConfig& config) {
  return {{"input_dim", config.input_dim},
          {"hidden_dims", config.hidden_dims},
          {"num_classes", config.num_classes},
          {"init_seed", config.init_seed}};
}

NetworkConfig config_from_json(const nlohmann::json& j) {
  NetworkConfig c;
  c.input_dim = j.at("input_dim").get<std::size_t>();
  c.hidden_dims = j.at("hidden_dims").get<std::vector<std::size_t>>();
  c.num_classes = j.at("num_classes").get<std::size_t>();
  c.init_seed = j.value("init_seed", std::uint64_t{0});
  return c;
}

nlohmann::json checkpoint_to_json(const PeerNetwork& net) {
  nlohmann::json params = nlohmann::json::object();
  for (const auto& p : net.parameters()) {
    params[p.name] = {{"shape", p.value.shape()},
                      {"data", std::vector<double>(p.value.data().begin(), p.value.data().end())}};
  }
  return {{"config", config_to_json(net.config())}, {"parameters", std::move(params)}};
}

PeerNetwork checkpoint_from_json(const nlohmann::json& j) {
  NetworkConfig config = config_from_json(j.at("config"));
  std::vector<NamedParameter> params;
  for (const auto& [name, entry] : j.at("parameters").items()) {
    params.push_back({name, Tensor::from(entry.at("shape").get<Shape>(),
                                         entry.at("data").get<std::vector<double>>())});
  }
  return PeerNetwork::from_parameters(std::move(config), std::move(params));
}

void save_checkpoint(const std::filesystem::path& path, const PeerNetwork& net) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out << checkpoint_to_json(net).dump() << '\n';
}

PeerNetwork load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read checkpoint " + path.string());
  return checkpoint_from_json(nlohmann::json::parse(in));
}

}  // namespace distilforge
