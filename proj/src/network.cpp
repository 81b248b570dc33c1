#include "evoshift/network.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "evoshift/error.hpp"

namespace evoshift {

std::vector<LayerPlan> plan_layers(const NetworkSpec& spec, ImageShape input) {
  spec.num_classes();
  if (input.size() == 0) throw Error(ErrorCode::NonPositiveExtent, "input shape must be positive");

  std::vector<LayerPlan> plan;
  plan.reserve(spec.layers.size());
  ImageShape shape = input;
  std::size_t offset = 0;
  for (const auto& layer : spec.layers) {
    LayerPlan p{layer, shape, shape};
    if (const auto* conv = std::get_if<ConvSpec>(&layer)) {
      const auto k = static_cast<std::size_t>(conv->kernel_size);
      p.out = {static_cast<std::size_t>(conv->out_channels), shape.height, shape.width};
      p.fan_in = shape.channels * k * k;
      p.weight_count = p.out.channels * p.fan_in;
      p.bias_count = p.out.channels;
    } else if (std::holds_alternative<MaxPoolSpec>(layer)) {
      p.out = {shape.channels, shape.height / 2, shape.width / 2};
      if (p.out.height == 0 || p.out.width == 0)
        throw Error(ErrorCode::ShapeUnderflow,
                    "max-pool on " + std::to_string(shape.height) + "x" + std::to_string(shape.width));
    } else {
      const auto units = std::holds_alternative<FullyConnectedSpec>(layer)
                             ? std::get<FullyConnectedSpec>(layer).out_units
                             : std::get<SoftmaxSpec>(layer).num_classes;
      p.out = {static_cast<std::size_t>(units), 1, 1};
      p.fan_in = shape.size();
      p.weight_count = p.out.channels * p.fan_in;
      p.bias_count = p.out.channels;
    }
    p.weight_offset = offset;
    p.bias_offset = offset + p.weight_count;
    offset += p.weight_count + p.bias_count;
    shape = p.out;
    plan.push_back(p);
  }
  return plan;
}

std::size_t parameter_count(const NetworkSpec& spec, ImageShape input) {
  std::size_t total = 0;
  for (const auto& p : plan_layers(spec, input)) total += p.weight_count + p.bias_count;
  return total;
}

namespace {

// Per-sample activations. acts[0] is the input, acts[l+1] the output of layer l
// (post-ReLU for conv/FC, probabilities for softmax). pool_index[l] stores the
// flat input index chosen by each max-pool output.
struct Workspace {
  std::vector<std::vector<double>> acts;
  std::vector<std::vector<std::size_t>> pool_index;
  std::vector<double> delta_out;
  std::vector<double> delta_in;

  explicit Workspace(const std::vector<LayerPlan>& plan) : acts(plan.size() + 1), pool_index(plan.size()) {
    acts[0].resize(plan.front().in.size());
    for (std::size_t l = 0; l < plan.size(); ++l) {
      acts[l + 1].resize(plan[l].out.size());
      if (std::holds_alternative<MaxPoolSpec>(plan[l].spec)) pool_index[l].resize(plan[l].out.size());
    }
  }
};

void conv_forward(const LayerPlan& p, const double* w, const double* b, const double* in, double* out) {
  const auto k = static_cast<std::ptrdiff_t>(std::get<ConvSpec>(p.spec).kernel_size);
  const auto pad = k / 2;
  const auto H = static_cast<std::ptrdiff_t>(p.in.height);
  const auto W = static_cast<std::ptrdiff_t>(p.in.width);
  const auto C = p.in.channels;
  const auto plane = static_cast<std::size_t>(H * W);
  for (std::size_t o = 0; o < p.out.channels; ++o) {
    double* dst = out + o * plane;
    std::fill(dst, dst + plane, b[o]);
    for (std::size_t c = 0; c < C; ++c) {
      const double* src = in + c * plane;
      for (std::ptrdiff_t ky = 0; ky < k; ++ky) {
        const auto y0 = std::max<std::ptrdiff_t>(0, pad - ky);
        const auto y1 = std::min<std::ptrdiff_t>(H, H + pad - ky);
        for (std::ptrdiff_t kx = 0; kx < k; ++kx) {
          const double wv = w[((o * C + c) * static_cast<std::size_t>(k) + static_cast<std::size_t>(ky)) *
                                  static_cast<std::size_t>(k) +
                              static_cast<std::size_t>(kx)];
          const auto x0 = std::max<std::ptrdiff_t>(0, pad - kx);
          const auto x1 = std::min<std::ptrdiff_t>(W, W + pad - kx);
          for (std::ptrdiff_t y = y0; y < y1; ++y) {
            double* drow = dst + y * W;
            const double* srow = src + (y + ky - pad) * W + (kx - pad);
            for (std::ptrdiff_t x = x0; x < x1; ++x) drow[x] += wv * srow[x];
          }
        }
      }
    }
  }
  for (std::size_t i = 0; i < p.out.size(); ++i) out[i] = std::max(0.0, out[i]);
}

// delta holds dL/d(out); it is masked in place by the ReLU derivative.
void conv_backward(const LayerPlan& p, const double* w, const double* in, const double* out, double* delta,
                   double* gw, double* gb, double* delta_in) {
  const auto k = static_cast<std::ptrdiff_t>(std::get<ConvSpec>(p.spec).kernel_size);
  const auto pad = k / 2;
  const auto H = static_cast<std::ptrdiff_t>(p.in.height);
  const auto W = static_cast<std::ptrdiff_t>(p.in.width);
  const auto C = p.in.channels;
  const auto plane = static_cast<std::size_t>(H * W);
  for (std::size_t i = 0; i < p.out.size(); ++i)
    if (out[i] <= 0.0) delta[i] = 0.0;
  if (delta_in) std::fill(delta_in, delta_in + p.in.size(), 0.0);

  for (std::size_t o = 0; o < p.out.channels; ++o) {
    const double* d = delta + o * plane;
    double bias_sum = 0.0;
    for (std::size_t i = 0; i < plane; ++i) bias_sum += d[i];
    gb[o] += bias_sum;
    for (std::size_t c = 0; c < C; ++c) {
      const double* src = in + c * plane;
      double* dsrc = delta_in ? delta_in + c * plane : nullptr;
      for (std::ptrdiff_t ky = 0; ky < k; ++ky) {
        const auto y0 = std::max<std::ptrdiff_t>(0, pad - ky);
        const auto y1 = std::min<std::ptrdiff_t>(H, H + pad - ky);
        for (std::ptrdiff_t kx = 0; kx < k; ++kx) {
          const std::size_t widx = ((o * C + c) * static_cast<std::size_t>(k) + static_cast<std::size_t>(ky)) *
                                       static_cast<std::size_t>(k) +
                                   static_cast<std::size_t>(kx);
          const double wv = w[widx];
          const auto x0 = std::max<std::ptrdiff_t>(0, pad - kx);
          const auto x1 = std::min<std::ptrdiff_t>(W, W + pad - kx);
          double acc = 0.0;
          for (std::ptrdiff_t y = y0; y < y1; ++y) {
            const double* drow = d + y * W;
            const auto shift = (y + ky - pad) * W + (kx - pad);
            const double* srow = src + shift;
            for (std::ptrdiff_t x = x0; x < x1; ++x) acc += drow[x] * srow[x];
            if (dsrc) {
              double* irow = dsrc + shift;
              for (std::ptrdiff_t x = x0; x < x1; ++x) irow[x] += wv * drow[x];
            }
          }
          gw[widx] += acc;
        }
      }
    }
  }
}

void pool_forward(const LayerPlan& p, const double* in, double* out, std::size_t* index) {
  const auto W = p.in.width;
  for (std::size_t c = 0; c < p.out.channels; ++c) {
    const std::size_t in_base = c * p.in.height * W;
    for (std::size_t y = 0; y < p.out.height; ++y) {
      for (std::size_t x = 0; x < p.out.width; ++x) {
        std::size_t best = in_base + 2 * y * W + 2 * x;
        for (std::size_t dy = 0; dy < 2; ++dy)
          for (std::size_t dx = 0; dx < 2; ++dx) {
            const std::size_t idx = in_base + (2 * y + dy) * W + 2 * x + dx;
            if (in[idx] > in[best]) best = idx;
          }
        const std::size_t o = (c * p.out.height + y) * p.out.width + x;
        out[o] = in[best];
        index[o] = best;
      }
    }
  }
}

void dense_forward(const LayerPlan& p, const double* w, const double* b, const double* in, double* out,
                   bool relu) {
  const auto n_in = p.in.size();
  for (std::size_t u = 0; u < p.out.channels; ++u) {
    const double* row = w + u * n_in;
    double acc = b[u];
    for (std::size_t i = 0; i < n_in; ++i) acc += row[i] * in[i];
    out[u] = relu ? std::max(0.0, acc) : acc;
  }
}

void dense_backward(const LayerPlan& p, const double* w, const double* in, const double* delta, double* gw,
                    double* gb, double* delta_in) {
  const auto n_in = p.in.size();
  if (delta_in) std::fill(delta_in, delta_in + n_in, 0.0);
  for (std::size_t u = 0; u < p.out.channels; ++u) {
    const double d = delta[u];
    if (d == 0.0) continue;
    gb[u] += d;
    double* grow = gw + u * n_in;
    for (std::size_t i = 0; i < n_in; ++i) grow[i] += d * in[i];
    if (delta_in) {
      const double* row = w + u * n_in;
      for (std::size_t i = 0; i < n_in; ++i) delta_in[i] += d * row[i];
    }
  }
}

void softmax_inplace(double* z, std::size_t n) {
  const double top = *std::max_element(z, z + n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    z[i] = std::exp(z[i] - top);
    sum += z[i];
  }
  for (std::size_t i = 0; i < n; ++i) z[i] /= sum;
}

void forward_sample(const std::vector<LayerPlan>& plan, const std::vector<double>& params, Workspace& ws) {
  for (std::size_t l = 0; l < plan.size(); ++l) {
    const auto& p = plan[l];
    const double* in = ws.acts[l].data();
    double* out = ws.acts[l + 1].data();
    const double* w = params.data() + p.weight_offset;
    const double* b = params.data() + p.bias_offset;
    if (std::holds_alternative<ConvSpec>(p.spec)) {
      conv_forward(p, w, b, in, out);
    } else if (std::holds_alternative<MaxPoolSpec>(p.spec)) {
      pool_forward(p, in, out, ws.pool_index[l].data());
    } else if (std::holds_alternative<FullyConnectedSpec>(p.spec)) {
      dense_forward(p, w, b, in, out, true);
    } else {
      dense_forward(p, w, b, in, out, false);
      softmax_inplace(out, p.out.size());
    }
  }
}

void check_batch(const Tensor& batch, ImageShape input) {
  if (batch.rank() != 4 || batch.dim(1) != input.channels || batch.dim(2) != input.height ||
      batch.dim(3) != input.width)
    throw Error(ErrorCode::ShapeMismatch, "batch shape does not match network input shape");
}

}  // namespace

Network::Network(NetworkSpec spec, ImageShape input, std::uint64_t seed)
    : spec_(std::move(spec)), input_(input), seed_(seed), num_classes_(spec_.num_classes()),
      plan_(plan_layers(spec_, input_)) {
  const auto& last = plan_.back();
  params_.assign(last.bias_offset + last.bias_count, 0.0);
  grads_.assign(params_.size(), 0.0);
}

void Network::set_params(std::span<const double> values) {
  if (values.size() != params_.size()) throw Error(ErrorCode::LengthMismatch, "parameter vector length");
  std::copy(values.begin(), values.end(), params_.begin());
}

Tensor Network::forward(const Tensor& batch) const {
  check_batch(batch, input_);
  const std::size_t n = batch.dim(0);
  Tensor probs({n, static_cast<std::size_t>(num_classes_)});
  Workspace ws(plan_);
  for (std::size_t s = 0; s < n; ++s) {
    const auto x = batch.row(s);
    std::copy(x.begin(), x.end(), ws.acts[0].begin());
    forward_sample(plan_, params_, ws);
    std::copy(ws.acts.back().begin(), ws.acts.back().end(), probs.row(s).begin());
  }
  return probs;
}

BatchStats Network::backward(const Tensor& batch, std::span<const int> labels) {
  check_batch(batch, input_);
  const std::size_t n = batch.dim(0);
  if (labels.size() != n) throw Error(ErrorCode::ShapeMismatch, "label count does not match batch");
  std::fill(grads_.begin(), grads_.end(), 0.0);

  BatchStats stats;
  stats.count = n;
  const double scale = 1.0 / static_cast<double>(n);
  Workspace ws(plan_);
  for (std::size_t s = 0; s < n; ++s) {
    const int y = labels[s];
    if (y < 0 || y >= num_classes_) throw Error(ErrorCode::ShapeMismatch, "label out of range");
    const auto x = batch.row(s);
    std::copy(x.begin(), x.end(), ws.acts[0].begin());
    forward_sample(plan_, params_, ws);

    const auto& probs = ws.acts.back();
    stats.mean_loss -= std::log(std::max(probs[static_cast<std::size_t>(y)], kProbabilityFloor));
    if (argmax(probs) == y) ++stats.correct;

    // d(mean CE)/d(logits) = (p - onehot) / n
    ws.delta_out.assign(probs.begin(), probs.end());
    ws.delta_out[static_cast<std::size_t>(y)] -= 1.0;
    for (auto& d : ws.delta_out) d *= scale;

    for (std::size_t l = plan_.size(); l-- > 0;) {
      const auto& p = plan_[l];
      const double* in = ws.acts[l].data();
      const double* w = params_.data() + p.weight_offset;
      double* gw = grads_.data() + p.weight_offset;
      double* gb = grads_.data() + p.bias_offset;
      const bool need_input_delta = l > 0;
      ws.delta_in.resize(p.in.size());
      double* din = need_input_delta ? ws.delta_in.data() : nullptr;

      if (std::holds_alternative<ConvSpec>(p.spec)) {
        conv_backward(p, w, in, ws.acts[l + 1].data(), ws.delta_out.data(), gw, gb, din);
      } else if (std::holds_alternative<MaxPoolSpec>(p.spec)) {
        if (din) {
          std::fill(din, din + p.in.size(), 0.0);
          const auto& idx = ws.pool_index[l];
          for (std::size_t o = 0; o < p.out.size(); ++o) din[idx[o]] += ws.delta_out[o];
        }
      } else {
        if (std::holds_alternative<FullyConnectedSpec>(p.spec)) {
          const auto& out = ws.acts[l + 1];
          for (std::size_t u = 0; u < out.size(); ++u)
            if (out[u] <= 0.0) ws.delta_out[u] = 0.0;
        }
        dense_backward(p, w, in, ws.delta_out.data(), gw, gb, din);
      }
      if (need_input_delta) std::swap(ws.delta_out, ws.delta_in);
    }
  }
  stats.mean_loss *= scale;
  return stats;
}

Network init_network(const NetworkSpec& spec, ImageShape input, std::uint64_t seed) {
  Network net(spec, input, seed);
  std::mt19937_64 rng(seed);
  auto params = net.params();
  for (const auto& p : net.plan()) {
    if (p.weight_count == 0) continue;
    const double bound = std::sqrt(6.0 / static_cast<double>(p.fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (std::size_t i = 0; i < p.weight_count; ++i) params[p.weight_offset + i] = dist(rng);
  }
  return net;
}

double cross_entropy(const Tensor& probs, std::span<const int> labels) {
  if (probs.rank() != 2 || probs.dim(0) != labels.size())
    throw Error(ErrorCode::ShapeMismatch, "probabilities and labels disagree in count");
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto row = probs.row(i);
    const auto y = static_cast<std::size_t>(labels[i]);
    if (labels[i] < 0 || y >= row.size()) throw Error(ErrorCode::ShapeMismatch, "label out of range");
    total -= std::log(std::max(row[y], kProbabilityFloor));
  }
  return total / static_cast<double>(labels.size());
}

int argmax(std::span<const double> row) {
  return static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
}

Evaluation evaluate(const Network& net, const LabeledDataset& ds) {
  if (ds.empty()) throw Error(ErrorCode::EmptyDataset, "cannot evaluate on an empty dataset");
  const auto probs = net.forward(ds.images);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < ds.size(); ++i)
    if (argmax(probs.row(i)) == ds.labels[i]) ++correct;
  return {static_cast<double>(correct) / static_cast<double>(ds.size()), cross_entropy(probs, ds.labels)};
}

}  // namespace evoshift
