// SPDX-License-Identifier: Apache-2.0
#include "distilforge/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <sstream>

#include "distilforge/rng.hpp"

namespace distilforge {

void Dataset::validate() const {
  if (labels.empty()) throw DataError(name + ": dataset is empty");
  if (features.rank() != 2 || features.rows() != labels.size())
    throw DataError(name + ": feature rows do not match label count");
  if (num_classes < 2) throw DataError(name + ": need at least 2 classes");
  for (std::size_t y : labels)
    if (y >= num_classes)
      throw DataError(name + ": label " + std::to_string(y) + " outside [0, " +
                      std::to_string(num_classes) + ")");
  for (double v : features.data())
    if (!std::isfinite(v)) throw DataError(name + ": non-finite feature value");
}

// ---- IDX -------------------------------------------------------------------

namespace {

std::vector<unsigned char> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<unsigned char>& bytes, std::size_t offset,
                        const std::filesystem::path& path) {
  if (offset + 4 > bytes.size()) throw DataError(path.string() + ": truncated header");
  return (std::uint32_t(bytes[offset]) << 24) | (std::uint32_t(bytes[offset + 1]) << 16) |
         (std::uint32_t(bytes[offset + 2]) << 8) | std::uint32_t(bytes[offset + 3]);
}

std::size_t infer_classes(const std::vector<std::size_t>& labels, std::size_t requested) {
  if (requested) return requested;
  std::size_t mx = 0;
  for (std::size_t y : labels) mx = std::max(mx, y);
  return std::max<std::size_t>(mx + 1, 2);
}

}  // namespace

Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                 std::size_t num_classes) {
  const auto img = read_bytes(images);
  const auto lab = read_bytes(labels);

  const std::uint32_t img_magic = read_be32(img, 0, images);
  if (img_magic != kIdxImageMagic) {
    std::ostringstream msg;
    msg << images.string() << ": bad IDX image magic 0x" << std::hex << img_magic;
    throw DataError(msg.str());
  }
  const std::uint32_t lab_magic = read_be32(lab, 0, labels);
  if (lab_magic != kIdxLabelMagic) {
    std::ostringstream msg;
    msg << labels.string() << ": bad IDX label magic 0x" << std::hex << lab_magic;
    throw DataError(msg.str());
  }

  const std::size_t count = read_be32(img, 4, images);
  const std::size_t rows = read_be32(img, 8, images);
  const std::size_t cols = read_be32(img, 12, images);
  const std::size_t label_count = read_be32(lab, 4, labels);
  if (count != label_count)
    throw DataError("IDX count mismatch: " + std::to_string(count) + " images vs " +
                    std::to_string(label_count) + " labels");

  const std::size_t width = rows * cols;
  if (img.size() < 16 + count * width) throw DataError(images.string() + ": truncated payload");
  if (lab.size() < 8 + count) throw DataError(labels.string() + ": truncated payload");

  std::vector<double> features(count * width);
  for (std::size_t i = 0; i < features.size(); ++i) features[i] = img[16 + i] / 255.0;
  std::vector<std::size_t> ys(count);
  for (std::size_t i = 0; i < count; ++i) ys[i] = lab[8 + i];

  Dataset ds{Tensor::from({count, width}, std::move(features)), std::move(ys), 0,
             images.stem().string()};
  ds.num_classes = infer_classes(ds.labels, num_classes);
  ds.validate();
  return ds;
}

// ---- CSV -------------------------------------------------------------------

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path, std::size_t num_classes) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": missing header row");
  const std::size_t columns = split(line).size();
  if (columns < 2) throw DataError(path.string() + ": need at least one feature and a label");

  std::vector<double> features;
  std::vector<std::size_t> ys;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (fields.size() != columns)
      throw DataError(where + ": expected " + std::to_string(columns) + " columns");
    for (std::size_t c = 0; c + 1 < columns; ++c) {
      double v = 0.0;
      const auto f = fields[c];
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || ptr != f.data() + f.size())
        throw DataError(where + ": bad feature value '" + std::string(f) + "'");
      features.push_back(v);
    }
    std::size_t y = 0;
    const auto f = fields.back();
    const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), y);
    if (ec != std::errc() || ptr != f.data() + f.size())
      throw DataError(where + ": bad label '" + std::string(f) + "'");
    ys.push_back(y);
  }
  const std::size_t n = ys.size();
  Dataset ds{Tensor::from({n, columns - 1}, std::move(features)), std::move(ys), 0,
             path.stem().string()};
  ds.num_classes = infer_classes(ds.labels, num_classes);
  ds.validate();
  return ds;
}

// ---- synthetic blobs -------------------------------------------------------

Dataset synth_blobs(const BlobsSpec& spec) {
  if (spec.num_classes < 2) throw std::invalid_argument("num_classes: must be at least 2");
  if (spec.per_class < 1) throw std::invalid_argument("per_class: must be at least 1");
  if (spec.dim < 2) throw std::invalid_argument("dim: must be at least 2");
  if (!(spec.spread >= 0.0) || !std::isfinite(spec.spread))
    throw std::invalid_argument("spread: must be finite and non-negative");

  constexpr double kRadius = 3.0;
  const std::size_t n = spec.num_classes * spec.per_class;
  std::vector<double> features(n * spec.dim, 0.0);
  std::vector<std::size_t> ys(n);
  Rng rng(spec.seed);
  for (std::size_t c = 0; c < spec.num_classes; ++c) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(c) /
                         static_cast<double>(spec.num_classes);
    for (std::size_t i = 0; i < spec.per_class; ++i) {
      const std::size_t row = c * spec.per_class + i;
      ys[row] = c;
      double* x = features.data() + row * spec.dim;
      x[0] = kRadius * std::cos(angle);
      x[1] = kRadius * std::sin(angle);
      if (spec.spread > 0.0)
        for (std::size_t d = 0; d < spec.dim; ++d) x[d] += spec.spread * rng.normal();
    }
  }
  Dataset ds{Tensor::from({n, spec.dim}, std::move(features)), std::move(ys), spec.num_classes,
             "blobs"};
  ds.validate();
  return ds;
}

// ---- normalization ---------------------------------------------------------

NormalizationStats NormalizationStats::compute(const Dataset& ds) {
  const std::size_t n = ds.size(), d = ds.input_dim();
  const auto x = ds.features.data();
  NormalizationStats s{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) s.mean[j] += x[i * d + j];
  for (double& m : s.mean) m /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const double diff = x[i * d + j] - s.mean[j];
      s.std[j] += diff * diff;
    }
  for (double& v : s.std) v = std::max(std::sqrt(v / static_cast<double>(n)), kStdFloor);
  return s;
}

Dataset NormalizationStats::apply(const Dataset& ds) const {
  const std::size_t n = ds.size(), d = ds.input_dim();
  if (d != mean.size())
    throw ShapeError("normalize: dataset width " + std::to_string(d) + " vs stats width " +
                     std::to_string(mean.size()));
  std::vector<double> out(ds.features.data().begin(), ds.features.data().end());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) out[i * d + j] = (out[i * d + j] - mean[j]) / std[j];
  return {Tensor::from({n, d}, std::move(out)), ds.labels, ds.num_classes, ds.name};
}

std::pair<std::vector<Dataset>, NormalizationStats> mean_std_normalize(
    const Dataset& train, std::span<const Dataset> others) {
  NormalizationStats stats = NormalizationStats::compute(train);
  std::vector<Dataset> out;
  out.reserve(1 + others.size());
  out.push_back(stats.apply(train));
  for (const Dataset& ds : others) out.push_back(stats.apply(ds));
  return {std::move(out), std::move(stats)};
}

// ---- batching --------------------------------------------------------------

std::vector<std::size_t> epoch_permutation(std::size_t n, std::uint64_t seed,
                                           std::uint64_t epoch) {
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  Rng rng(derive_seed(seed, {epoch}));
  for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
  return perm;
}

Batch gather_batch(const Dataset& ds, std::span<const std::size_t> indices) {
  const std::size_t d = ds.input_dim(), m = ds.num_classes, b = indices.size();
  const auto x = ds.features.data();
  std::vector<double> feats(b * d), one_hot(b * m, 0.0);
  for (std::size_t i = 0; i < b; ++i) {
    const std::size_t src = indices[i];
    std::copy_n(x.begin() + static_cast<std::ptrdiff_t>(src * d), d, feats.begin() + static_cast<std::ptrdiff_t>(i * d));
    one_hot[i * m + ds.labels[src]] = 1.0;
  }
  return {Tensor::from({b, d}, std::move(feats)), Tensor::from({b, m}, std::move(one_hot)),
          {indices.begin(), indices.end()}};
}

std::vector<Batch> make_batches(const Dataset& ds, std::size_t batch_size, std::uint64_t seed,
                                std::uint64_t epoch) {
  if (batch_size == 0) throw std::invalid_argument("batch_size: must be at least 1");
  const auto perm = epoch_permutation(ds.size(), seed, epoch);
  std::vector<Batch> batches;
  for (std::size_t start = 0; start < perm.size(); start += batch_size) {
    const std::size_t len = std::min(batch_size, perm.size() - start);
    batches.push_back(gather_batch(ds, std::span(perm).subspan(start, len)));
  }
  return batches;
}

}  // namespace distilforge
