#pragma once

#include <filesystem>

#include "evoshift/network.hpp"

namespace evoshift {

enum class CheckpointFormat { Text, Binary };

inline constexpr int kCheckpointVersion = 1;

/// Text: a JSON document with the parameters as shortest round-trip decimals.
/// Binary: the same document encoded as CBOR with the parameters stored as a
/// byte string of little-endian IEEE-754 doubles. Both round-trip bit-exactly.
void save_checkpoint(const Network& net, const std::filesystem::path& path, CheckpointFormat format);

/// Detects the format from the first byte.
Network load_checkpoint(const std::filesystem::path& path);

}  // namespace evoshift
