// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "distilforge/tensor.hpp"

namespace distilforge {

/// Malformed or inconsistent input files.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Dataset {
  Tensor features;                  // [n x input_dim], constant
  std::vector<std::size_t> labels;  // class index per row
  std::size_t num_classes = 0;
  std::string name;

  std::size_t size() const { return labels.size(); }
  std::size_t input_dim() const { return features.cols(); }
  /// Checks label range, row count and finiteness.
  void validate() const;
};

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

/// MNIST-style IDX pair. Images are flattened and scaled to [0, 1].
/// `num_classes` of zero means one more than the largest label seen.
Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                 std::size_t num_classes = 0);

/// Header row, float feature columns, integer label in the last column.
Dataset load_csv(const std::filesystem::path& path, std::size_t num_classes = 0);

struct BlobsSpec {
  std::size_t num_classes = 3;
  std::size_t per_class = 100;
  std::size_t dim = 2;
  double spread = 0.5;
  std::uint64_t seed = 0;
};

/// Isotropic Gaussian blobs centred on a radius-3 ring in the first two
/// coordinates. Rows are grouped by class.
Dataset synth_blobs(const BlobsSpec& spec);

inline constexpr double kStdFloor = 1e-8;

struct NormalizationStats {
  std::vector<double> mean;
  std::vector<double> std;  // population std, floored at kStdFloor

  static NormalizationStats compute(const Dataset& ds);
  Dataset apply(const Dataset& ds) const;
};

/// Standardizes `train` with its own statistics and applies the same
/// statistics to every dataset in `others`. Result order: train, then others.
std::pair<std::vector<Dataset>, NormalizationStats> mean_std_normalize(
    const Dataset& train, std::span<const Dataset> others = {});

struct Batch {
  Tensor features;      // [b x input_dim]
  Tensor one_hot;       // [b x m]
  std::vector<std::size_t> indices;

  std::size_t size() const { return indices.size(); }
};

/// Permutation of [0, n) fixed by (seed, epoch).
std::vector<std::size_t> epoch_permutation(std::size_t n, std::uint64_t seed, std::uint64_t epoch);

/// Shuffled batches covering every sample exactly once; the last batch may be
/// short.
std::vector<Batch> make_batches(const Dataset& ds, std::size_t batch_size, std::uint64_t seed,
                                std::uint64_t epoch);

/// Rows `indices` of `ds` with one-hot labels, in the given order.
Batch gather_batch(const Dataset& ds, std::span<const std::size_t> indices);

}  // namespace distilforge
