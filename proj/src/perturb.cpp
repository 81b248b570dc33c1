#include "evoshift/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include <json.hpp>

#include "evoshift/error.hpp"

namespace evoshift {

void PerturbationGenome::validate() const {
  if (num_classes < 1 || num_pixels < 1 || shape.size() == 0)
    throw Error(ErrorCode::NonPositiveExtent, "genome metadata must be positive");
  if (vector.size() != length(num_classes, num_pixels, shape))
    throw Error(ErrorCode::LengthMismatch, "genome length does not match its metadata");
}

void PixelPerturbation::validate() const {
  if (num_classes < 1 || num_pixels < 1 || shape.size() == 0)
    throw Error(ErrorCode::NonPositiveExtent, "perturbation metadata must be positive");
  if (classes.size() != static_cast<std::size_t>(num_classes))
    throw Error(ErrorCode::ClassCountMismatch, "perturbation class list size");
  for (const auto& edits : classes) {
    if (edits.size() > static_cast<std::size_t>(num_pixels))
      throw Error(ErrorCode::TooManyPixels, "class has more edits than num_pixels");
    for (std::size_t i = 0; i < edits.size(); ++i) {
      const auto& e = edits[i];
      if (e.row < 0 || e.col < 0 || static_cast<std::size_t>(e.row) >= shape.height ||
          static_cast<std::size_t>(e.col) >= shape.width)
        throw Error(ErrorCode::ShapeMismatch, "edit coordinate out of bounds");
      if (e.delta.size() != shape.channels) throw Error(ErrorCode::ShapeMismatch, "edit delta channel count");
      for (double d : e.delta)
        if (!(d >= -1.0 && d <= 1.0)) throw Error(ErrorCode::BadFormat, "edit delta outside [-1,1]");
      for (std::size_t j = 0; j < i; ++j)
        if (edits[j].row == e.row && edits[j].col == e.col)
          throw Error(ErrorCode::BadFormat, "duplicate coordinate within a class");
    }
  }
}

namespace {
int to_index(double v, std::size_t extent) {
  const double hi = static_cast<double>(extent) - 1.0;
  // NaN decodes to 0.
  const double r = std::isnan(v) ? 0.0 : std::clamp(std::round(v), 0.0, hi);
  return static_cast<int>(r);
}
}  // namespace

PixelPerturbation decode(const PerturbationGenome& genome) {
  genome.validate();
  PixelPerturbation p{genome.num_classes, genome.num_pixels, genome.shape, {}};
  p.classes.resize(static_cast<std::size_t>(genome.num_classes));
  const std::size_t block = 2 + genome.shape.channels;
  for (int c = 0; c < genome.num_classes; ++c) {
    auto& edits = p.classes[static_cast<std::size_t>(c)];
    for (int k = 0; k < genome.num_pixels; ++k) {
      const double* g = genome.vector.data() + (static_cast<std::size_t>(c * genome.num_pixels + k)) * block;
      PixelEdit e{to_index(g[0], genome.shape.height), to_index(g[1], genome.shape.width), {}};
      e.delta.resize(genome.shape.channels);
      for (std::size_t ch = 0; ch < genome.shape.channels; ++ch)
        e.delta[ch] = std::isnan(g[2 + ch]) ? 0.0 : std::clamp(g[2 + ch], -1.0, 1.0);
      auto same = std::find_if(edits.begin(), edits.end(),
                               [&](const PixelEdit& x) { return x.row == e.row && x.col == e.col; });
      if (same != edits.end())
        same->delta = std::move(e.delta);
      else
        edits.push_back(std::move(e));
    }
  }
  return p;
}

PerturbationGenome encode(const PixelPerturbation& p) {
  p.validate();
  PerturbationGenome g{{}, p.num_classes, p.num_pixels, p.shape};
  g.vector.reserve(PerturbationGenome::length(p.num_classes, p.num_pixels, p.shape));
  for (const auto& edits : p.classes) {
    if (edits.empty()) throw Error(ErrorCode::BadFormat, "cannot encode a class without edits");
    for (int k = 0; k < p.num_pixels; ++k) {
      const auto& e = edits[std::min<std::size_t>(static_cast<std::size_t>(k), edits.size() - 1)];
      g.vector.push_back(e.row);
      g.vector.push_back(e.col);
      g.vector.insert(g.vector.end(), e.delta.begin(), e.delta.end());
    }
  }
  return g;
}

LabeledDataset apply(const LabeledDataset& ds, const PixelPerturbation& p) {
  p.validate();
  const auto shape = ds.image_shape();
  if (shape != p.shape) throw Error(ErrorCode::ShapeMismatch, "perturbation shape differs from dataset");
  if (ds.num_classes != p.num_classes) throw Error(ErrorCode::ClassCountMismatch, "perturbation class count");
  LabeledDataset out = ds;
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto img = out.images.row(i);
    for (const auto& e : p.classes[static_cast<std::size_t>(out.labels[i])]) {
      for (std::size_t ch = 0; ch < shape.channels; ++ch) {
        auto& v = img[ch * shape.pixels() + static_cast<std::size_t>(e.row) * shape.width + static_cast<std::size_t>(e.col)];
        v = std::clamp(v + e.delta[ch], 0.0, 1.0);
      }
    }
  }
  return out;
}

PixelPerturbation zero_perturbation(int num_classes, int num_pixels, ImageShape shape) {
  PixelPerturbation p{num_classes, num_pixels, shape, {}};
  p.classes.assign(static_cast<std::size_t>(num_classes),
                   std::vector<PixelEdit>{PixelEdit{0, 0, std::vector<double>(shape.channels, 0.0)}});
  p.validate();
  return p;
}

PixelPerturbation baseline_uniform(int num_classes, int num_pixels, ImageShape shape, std::uint64_t seed) {
  if (num_pixels < 1 || static_cast<std::size_t>(num_pixels) > shape.pixels())
    throw Error(ErrorCode::TooManyPixels, "num_pixels exceeds the image area");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> delta(-1.0, 1.0);
  PixelPerturbation p{num_classes, num_pixels, shape, {}};
  p.classes.resize(static_cast<std::size_t>(num_classes));
  std::vector<std::size_t> cells(shape.pixels());
  for (auto& edits : p.classes) {
    std::iota(cells.begin(), cells.end(), 0);
    // Partial Fisher-Yates: the first num_pixels cells form the sample.
    for (std::size_t k = 0; k < static_cast<std::size_t>(num_pixels); ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, cells.size() - 1);
      std::swap(cells[k], cells[pick(rng)]);
      PixelEdit e{static_cast<int>(cells[k] / shape.width), static_cast<int>(cells[k] % shape.width), {}};
      for (std::size_t ch = 0; ch < shape.channels; ++ch) e.delta.push_back(delta(rng));
      edits.push_back(std::move(e));
    }
  }
  return p;
}

PixelPerturbation baseline_column(int num_classes, int num_pixels, ImageShape shape) {
  if (num_classes < 1 || num_pixels < 1) throw Error(ErrorCode::NonPositiveExtent, "class and pixel counts");
  if (static_cast<std::size_t>(num_classes) * static_cast<std::size_t>(num_pixels) > shape.height)
    throw Error(ErrorCode::ClassRowOverflow, "num_classes * num_pixels exceeds the image height");
  PixelPerturbation p{num_classes, num_pixels, shape, {}};
  p.classes.resize(static_cast<std::size_t>(num_classes));
  for (int c = 0; c < num_classes; ++c)
    for (int k = 0; k < num_pixels; ++k)
      p.classes[static_cast<std::size_t>(c)].push_back(
          PixelEdit{static_cast<int>(static_cast<std::size_t>(c * num_pixels + k) % shape.height), 0,
                    std::vector<double>(shape.channels, 1.0)});
  return p;
}

void save_perturbation(const PixelPerturbation& p, const std::filesystem::path& path) {
  p.validate();
  nlohmann::json classes = nlohmann::json::array();
  for (const auto& edits : p.classes) {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& e : edits) list.push_back({{"row", e.row}, {"col", e.col}, {"delta", e.delta}});
    classes.push_back(std::move(list));
  }
  const nlohmann::json doc = {{"version", kPerturbationFileVersion},
                              {"num_classes", p.num_classes},
                              {"num_pixels", p.num_pixels},
                              {"shape", {p.shape.channels, p.shape.height, p.shape.width}},
                              {"classes", std::move(classes)}};
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot open " + path.string());
  out << doc.dump(1) << '\n';
}

PixelPerturbation load_perturbation(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  try {
    const auto doc = nlohmann::json::parse(in);
    if (doc.at("version").get<int>() != kPerturbationFileVersion)
      throw Error(ErrorCode::BadFormat, "unsupported perturbation file version");
    const auto dims = doc.at("shape").get<std::vector<std::size_t>>();
    if (dims.size() != 3) throw Error(ErrorCode::BadFormat, "shape must have 3 entries");
    PixelPerturbation p{doc.at("num_classes").get<int>(), doc.at("num_pixels").get<int>(), {dims[0], dims[1], dims[2]}, {}};
    for (const auto& list : doc.at("classes")) {
      std::vector<PixelEdit> edits;
      for (const auto& e : list)
        edits.push_back({e.at("row").get<int>(), e.at("col").get<int>(), e.at("delta").get<std::vector<double>>()});
      p.classes.push_back(std::move(edits));
    }
    p.validate();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BadFormat, std::string("perturbation file: ") + e.what());
  }
}

}  // namespace evoshift
