#pragma once

#include <filesystem>

#include "evoshift/dataset.hpp"

namespace evoshift {

enum class IdxPixelType { UnsignedByte, Double };

/// Reads an IDX image/label pair. Images may be unsigned bytes (magic 2051,
/// scaled by 1/255) or big-endian doubles (type 0x0E, taken verbatim), with
/// dims (n, h, w) or (n, c, h, w). Labels are magic 2049. Files ending in .gz
/// are decompressed transparently. num_classes is max(label) + 1 unless given.
LabeledDataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                        int num_classes = 0);

/// Writes the pair. UnsignedByte rounds v*255; Double is lossless.
void write_idx(const LabeledDataset& ds, const std::filesystem::path& images, const std::filesystem::path& labels,
               IdxPixelType type = IdxPixelType::Double);

}  // namespace evoshift
