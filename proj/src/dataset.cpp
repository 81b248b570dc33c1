#include "evoshift/dataset.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>

#include "evoshift/error.hpp"

namespace evoshift {

ImageShape LabeledDataset::image_shape() const {
  if (images.rank() != 4) throw Error(ErrorCode::ShapeMismatch, "dataset images must be rank 4");
  return {images.dim(1), images.dim(2), images.dim(3)};
}

void LabeledDataset::validate() const {
  if (images.rank() != 4) throw Error(ErrorCode::ShapeMismatch, "dataset images must be rank 4");
  if (images.dim(0) != labels.size())
    throw Error(ErrorCode::CountMismatch, "image count differs from label count");
  if (num_classes < 1) throw Error(ErrorCode::NonPositiveExtent, "num_classes must be positive");
  for (int y : labels)
    if (y < 0 || y >= num_classes) throw Error(ErrorCode::SizeMismatch, "label out of range");
  for (double v : images.data())
    if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorCode::BadFormat, "pixel outside [0,1]");
}

LabeledDataset make_dataset(ImageShape shape, std::vector<double> pixels, std::vector<int> labels,
                            int num_classes) {
  const std::size_t n = labels.size();
  if (n == 0) throw Error(ErrorCode::EmptyDataset, "no samples");
  LabeledDataset ds{Tensor({n, shape.channels, shape.height, shape.width}, std::move(pixels)),
                    std::move(labels), num_classes};
  ds.validate();
  return ds;
}

LabeledDataset select(const LabeledDataset& ds, std::span<const std::size_t> indices) {
  if (indices.empty()) throw Error(ErrorCode::EmptyDataset, "empty selection");
  const auto shape = ds.image_shape();
  const auto stride = shape.size();
  std::vector<double> pixels(indices.size() * stride);
  std::vector<int> labels(indices.size());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const auto src = ds.images.row(indices[k]);
    std::copy(src.begin(), src.end(), pixels.begin() + static_cast<std::ptrdiff_t>(k * stride));
    labels[k] = ds.labels.at(indices[k]);
  }
  return {Tensor({indices.size(), shape.channels, shape.height, shape.width}, std::move(pixels)),
          std::move(labels), ds.num_classes};
}

LabeledDataset random_subset(const LabeledDataset& ds, std::size_t count, std::uint64_t seed) {
  if (count >= ds.size()) return ds;
  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(count);
  std::sort(order.begin(), order.end());
  return select(ds, order);
}

std::vector<double> class_frequencies(const LabeledDataset& ds) {
  std::vector<double> freq(static_cast<std::size_t>(ds.num_classes), 0.0);
  for (int y : ds.labels) freq[static_cast<std::size_t>(y)] += 1.0;
  for (auto& f : freq) f /= static_cast<double>(ds.size());
  return freq;
}

}  // namespace evoshift
