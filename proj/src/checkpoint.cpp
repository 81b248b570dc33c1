#include "evoshift/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <json.hpp>

#include "evoshift/error.hpp"

namespace evoshift {

static_assert(std::endian::native == std::endian::little, "binary checkpoints assume a little-endian host");

using nlohmann::json;

void save_checkpoint(const Network& net, const std::filesystem::path& path, CheckpointFormat format) {
  const auto shape = net.input_shape();
  json doc = {
      {"version", kCheckpointVersion},
      {"arch", to_string(net.spec())},
      {"input_shape", {shape.channels, shape.height, shape.width}},
      {"seed", net.seed()},
      {"format", format == CheckpointFormat::Text ? "text" : "binary"},
  };
  const auto params = net.params();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot open " + path.string());
  if (format == CheckpointFormat::Text) {
    doc["params"] = std::vector<double>(params.begin(), params.end());
    out << doc.dump() << '\n';
  } else {
    std::vector<std::uint8_t> bytes(params.size() * sizeof(double));
    std::memcpy(bytes.data(), params.data(), bytes.size());
    doc["params"] = json::binary(std::move(bytes));
    const auto cbor = json::to_cbor(doc);
    out.write(reinterpret_cast<const char*>(cbor.data()), static_cast<std::streamsize>(cbor.size()));
  }
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

Network load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  const std::vector<std::uint8_t> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (raw.empty()) throw Error(ErrorCode::TruncatedFile, "empty checkpoint " + path.string());

  json doc;
  try {
    doc = raw.front() == '{' ? json::parse(raw) : json::from_cbor(raw);
    if (doc.at("version").get<int>() != kCheckpointVersion)
      throw Error(ErrorCode::BadFormat, "unsupported checkpoint version");
    const auto dims = doc.at("input_shape").get<std::vector<std::size_t>>();
    if (dims.size() != 3) throw Error(ErrorCode::BadFormat, "input_shape must have 3 entries");
    Network net(parse_arch(doc.at("arch").get<std::string>()), {dims[0], dims[1], dims[2]},
                doc.at("seed").get<std::uint64_t>());
    const auto& p = doc.at("params");
    std::vector<double> params;
    if (p.is_binary()) {
      const auto& bytes = p.get_binary();
      if (bytes.size() % sizeof(double) != 0) throw Error(ErrorCode::TruncatedFile, "parameter blob");
      params.resize(bytes.size() / sizeof(double));
      std::memcpy(params.data(), bytes.data(), bytes.size());
    } else {
      params = p.get<std::vector<double>>();
    }
    net.set_params(params);
    return net;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadFormat, std::string("checkpoint ") + path.string() + ": " + e.what());
  }
}

}  // namespace evoshift
