#include "evoshift/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

#include <json.hpp>

#include "evoshift/error.hpp"

namespace evoshift {

void shift_image(std::span<const double> src, std::span<double> dst, ImageShape shape, int dy, int dx) {
  const auto H = static_cast<int>(shape.height);
  const auto W = static_cast<int>(shape.width);
  std::fill(dst.begin(), dst.end(), 0.0);
  for (std::size_t c = 0; c < shape.channels; ++c) {
    const std::size_t base = c * shape.pixels();
    for (int y = 0; y < H; ++y) {
      const int sy = y - dy;
      if (sy < 0 || sy >= H) continue;
      for (int x = 0; x < W; ++x) {
        const int sx = x - dx;
        if (sx < 0 || sx >= W) continue;
        dst[base + static_cast<std::size_t>(y * W + x)] = src[base + static_cast<std::size_t>(sy * W + sx)];
      }
    }
  }
}

TrainHistory train(Network& net, const LabeledDataset& ds, const TrainOptions& options) {
  if (ds.empty()) throw Error(ErrorCode::EmptyDataset, "cannot train on an empty dataset");
  if (options.epochs < 1) throw Error(ErrorCode::InvalidConfig, "epochs must be at least 1");
  if (options.batch_size < 1) throw Error(ErrorCode::InvalidConfig, "batch size must be at least 1");
  options.optimizer.validate();
  const auto shape = ds.image_shape();
  if (shape != net.input_shape()) throw Error(ErrorCode::ShapeMismatch, "dataset shape differs from network input");

  std::mt19937_64 rng(options.seed);
  std::uniform_int_distribution<int> shift(-options.max_shift, options.max_shift);
  OptimizerState state(net.params().size());
  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), 0);

  TrainHistory history;
  const std::size_t stride = shape.size();
  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += options.batch_size) {
      const std::size_t count = std::min(options.batch_size, order.size() - begin);
      Tensor batch({count, shape.channels, shape.height, shape.width});
      std::vector<int> labels(count);
      for (std::size_t k = 0; k < count; ++k) {
        const std::size_t idx = order[begin + k];
        auto dst = batch.data().subspan(k * stride, stride);
        const auto src = ds.images.row(idx);
        if (options.augment) {
          const int dy = shift(rng);
          const int dx = shift(rng);
          shift_image(src, dst, shape, dy, dx);
        } else {
          std::copy(src.begin(), src.end(), dst.begin());
        }
        labels[k] = ds.labels[idx];
      }
      const auto stats = net.backward(batch, labels);
      if (!std::isfinite(stats.mean_loss)) {
        history.diverged = true;
        return history;
      }
      loss_sum += stats.mean_loss * static_cast<double>(count);
      correct += stats.correct;
      step(net.params(), net.grads(), state, options.optimizer);
    }
    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = loss_sum / static_cast<double>(ds.size());
    record.train_accuracy = static_cast<double>(correct) / static_cast<double>(ds.size());
    if (options.eval) record.eval_accuracy = evaluate(net, *options.eval).accuracy;
    record.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    history.epochs.push_back(record);
  }
  for (double p : net.params())
    if (!std::isfinite(p)) history.diverged = true;
  return history;
}

void write_history(std::ostream& out, const TrainHistory& history) {
  for (const auto& r : history.epochs) {
    nlohmann::json line = {{"epoch", r.epoch},
                           {"train_loss", r.train_loss},
                           {"train_acc", r.train_accuracy},
                           {"wall_ms", r.wall_ms}};
    if (r.eval_accuracy) line["eval_acc"] = *r.eval_accuracy;
    out << line.dump() << '\n';
  }
}

}  // namespace evoshift
