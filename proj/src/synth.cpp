#include "evoshift/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "evoshift/error.hpp"

namespace evoshift {

namespace {

// 3x3 box blur with edge clamping, then standardised to zero mean, unit std.
std::vector<double> smooth_template(std::mt19937_64& rng, ImageShape shape) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> raw(shape.size());
  for (auto& v : raw) v = normal(rng);
  std::vector<double> out(shape.size(), 0.0);
  const auto H = static_cast<int>(shape.height);
  const auto W = static_cast<int>(shape.width);
  for (std::size_t c = 0; c < shape.channels; ++c) {
    const std::size_t base = c * shape.pixels();
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) {
        double acc = 0.0;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int sy = std::clamp(y + dy, 0, H - 1);
            const int sx = std::clamp(x + dx, 0, W - 1);
            acc += raw[base + static_cast<std::size_t>(sy * W + sx)];
          }
        out[base + static_cast<std::size_t>(y * W + x)] = acc / 9.0;
      }
  }
  double mean = 0.0;
  for (double v : out) mean += v;
  mean /= static_cast<double>(out.size());
  double var = 0.0;
  for (double v : out) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(out.size()));
  for (auto& v : out) v = sd > 0.0 ? (v - mean) / sd : 0.0;
  return out;
}

LabeledDataset draw(std::mt19937_64& rng, const std::vector<std::vector<double>>& templates, std::size_t per_class,
                    const SynthConfig& cfg) {
  std::normal_distribution<double> normal(0.0, cfg.noise);
  const std::size_t n = per_class * templates.size();
  std::vector<double> pixels;
  pixels.reserve(n * cfg.shape.size());
  std::vector<int> labels;
  labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto label = i % templates.size();
    for (double t : templates[label])
      pixels.push_back(std::clamp(cfg.background + cfg.template_amplitude * t + normal(rng), 0.0, 1.0));
    labels.push_back(static_cast<int>(label));
  }
  return make_dataset(cfg.shape, std::move(pixels), std::move(labels), cfg.classes);
}

}  // namespace

std::pair<LabeledDataset, LabeledDataset> synth_dataset(const SynthConfig& cfg) {
  if (cfg.classes < 2) throw Error(ErrorCode::InvalidConfig, "synthetic data needs at least two classes");
  if (cfg.train_per_class < 1 || cfg.test_per_class < 1 || cfg.shape.size() == 0)
    throw Error(ErrorCode::NonPositiveExtent, "synthetic dataset sizes must be positive");
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::vector<double>> templates;
  for (int c = 0; c < cfg.classes; ++c) templates.push_back(smooth_template(rng, cfg.shape));
  auto train = draw(rng, templates, cfg.train_per_class, cfg);
  auto test = draw(rng, templates, cfg.test_per_class, cfg);
  return {std::move(train), std::move(test)};
}

}  // namespace evoshift
