#include "evoshift/idx.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include <zlib.h>

#include "evoshift/error.hpp"

namespace evoshift {

namespace {

constexpr std::uint8_t kTypeUnsignedByte = 0x08;
constexpr std::uint8_t kTypeDouble = 0x0E;

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  if (path.extension() == ".gz") {
    gzFile f = gzopen(path.string().c_str(), "rb");
    if (!f) throw Error(ErrorCode::Io, "cannot open " + path.string());
    std::vector<std::uint8_t> out;
    std::uint8_t buf[1 << 16];
    int got = 0;
    while ((got = gzread(f, buf, sizeof buf)) > 0) out.insert(out.end(), buf, buf + got);
    const bool failed = got < 0;
    gzclose(f);
    if (failed) throw Error(ErrorCode::TruncatedFile, "corrupt gzip stream in " + path.string());
    return out;
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  if (path.extension() == ".gz") {
    gzFile f = gzopen(path.string().c_str(), "wb");
    if (!f) throw Error(ErrorCode::Io, "cannot open " + path.string());
    const int wrote = gzwrite(f, bytes.data(), static_cast<unsigned>(bytes.size()));
    gzclose(f);
    if (wrote != static_cast<int>(bytes.size())) throw Error(ErrorCode::Io, "write failed for " + path.string());
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot open " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

std::uint32_t read_be32(const std::vector<std::uint8_t>& b, std::size_t at, const std::filesystem::path& path) {
  if (at + 4 > b.size()) throw Error(ErrorCode::TruncatedFile, path.string() + " header");
  return (std::uint32_t{b[at]} << 24) | (std::uint32_t{b[at + 1]} << 16) | (std::uint32_t{b[at + 2]} << 8) |
         std::uint32_t{b[at + 3]};
}

void push_be32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) b.push_back(static_cast<std::uint8_t>(v >> s));
}

}  // namespace

LabeledDataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels, int num_classes) {
  const auto img = read_file(images);
  const auto lab = read_file(labels);

  const auto img_magic = read_be32(img, 0, images);
  const std::uint8_t type = static_cast<std::uint8_t>(img_magic >> 8);
  const std::uint8_t ndims = static_cast<std::uint8_t>(img_magic);
  if ((img_magic >> 16) != 0 || (type != kTypeUnsignedByte && type != kTypeDouble) || (ndims != 3 && ndims != 4))
    throw Error(ErrorCode::BadMagic, images.string() + ": magic " + std::to_string(img_magic) + " is not an image file");
  if (read_be32(lab, 0, labels) != 2049)
    throw Error(ErrorCode::BadMagic, labels.string() + ": expected label magic 2049");

  std::vector<std::size_t> dims(ndims);
  for (std::size_t d = 0; d < ndims; ++d) dims[d] = read_be32(img, 4 + 4 * d, images);
  const std::size_t n = dims[0];
  const ImageShape shape = ndims == 3 ? ImageShape{1, dims[1], dims[2]} : ImageShape{dims[1], dims[2], dims[3]};
  const std::size_t label_count = read_be32(lab, 4, labels);
  if (label_count != n)
    throw Error(ErrorCode::CountMismatch,
                std::to_string(n) + " images but " + std::to_string(label_count) + " labels");
  if (n == 0) throw Error(ErrorCode::EmptyDataset, images.string() + " holds no images");

  const std::size_t header = 4 + 4 * static_cast<std::size_t>(ndims);
  const std::size_t values = n * shape.size();
  const std::size_t width = type == kTypeDouble ? 8 : 1;
  if (img.size() < header + values * width) throw Error(ErrorCode::TruncatedFile, images.string());
  if (lab.size() < 8 + n) throw Error(ErrorCode::TruncatedFile, labels.string());

  std::vector<double> pixels(values);
  for (std::size_t i = 0; i < values; ++i) {
    if (type == kTypeUnsignedByte) {
      pixels[i] = img[header + i] / 255.0;
    } else {
      std::uint64_t bits = 0;
      for (std::size_t k = 0; k < 8; ++k) bits = (bits << 8) | img[header + 8 * i + k];
      pixels[i] = std::bit_cast<double>(bits);
    }
  }
  std::vector<int> y(n);
  int max_label = 0;
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = lab[8 + i];
    max_label = std::max(max_label, y[i]);
  }
  return make_dataset(shape, std::move(pixels), std::move(y), num_classes > 0 ? num_classes : max_label + 1);
}

void write_idx(const LabeledDataset& ds, const std::filesystem::path& images, const std::filesystem::path& labels,
               IdxPixelType type) {
  ds.validate();
  const auto shape = ds.image_shape();
  const std::uint8_t code = type == IdxPixelType::Double ? kTypeDouble : kTypeUnsignedByte;
  const std::uint8_t ndims = shape.channels == 1 ? 3 : 4;
  std::vector<std::uint8_t> img;
  push_be32(img, (std::uint32_t{code} << 8) | ndims);
  push_be32(img, static_cast<std::uint32_t>(ds.size()));
  if (ndims == 4) push_be32(img, static_cast<std::uint32_t>(shape.channels));
  push_be32(img, static_cast<std::uint32_t>(shape.height));
  push_be32(img, static_cast<std::uint32_t>(shape.width));
  for (double v : ds.images.data()) {
    if (type == IdxPixelType::UnsignedByte) {
      img.push_back(static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)));
    } else {
      const auto bits = std::bit_cast<std::uint64_t>(v);
      for (int s = 56; s >= 0; s -= 8) img.push_back(static_cast<std::uint8_t>(bits >> s));
    }
  }
  std::vector<std::uint8_t> lab;
  push_be32(lab, 2049);
  push_be32(lab, static_cast<std::uint32_t>(ds.size()));
  for (int y : ds.labels) {
    if (y > 255) throw Error(ErrorCode::BadFormat, "IDX labels are single bytes");
    lab.push_back(static_cast<std::uint8_t>(y));
  }
  write_file(images, img);
  write_file(labels, lab);
}

}  // namespace evoshift
