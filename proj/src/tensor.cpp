#include "evoshift/tensor.hpp"

#include <cmath>
#include <functional>
#include <numeric>

#include "evoshift/error.hpp"

namespace evoshift {

std::size_t shape_product(std::span<const std::size_t> shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

namespace {
void check_shape(const std::vector<std::size_t>& shape) {
  if (shape.empty()) throw Error(ErrorCode::NonPositiveExtent, "tensor shape has no axes");
  for (auto e : shape)
    if (e == 0) throw Error(ErrorCode::NonPositiveExtent, "tensor extent must be positive");
}
}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape, double fill) : shape_(std::move(shape)) {
  check_shape(shape_);
  data_.assign(shape_product(shape_), fill);
}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  check_shape(shape_);
  if (shape_product(shape_) != data_.size())
    throw Error(ErrorCode::ShapeMismatch, "data length does not match shape");
}

std::size_t Tensor::row_size() const { return shape_.empty() ? 0 : data_.size() / shape_[0]; }

std::span<const double> Tensor::row(std::size_t i) const {
  const auto n = row_size();
  return std::span<const double>(data_).subspan(i * n, n);
}

std::span<double> Tensor::row(std::size_t i) {
  const auto n = row_size();
  return std::span<double>(data_).subspan(i * n, n);
}

bool Tensor::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace evoshift
