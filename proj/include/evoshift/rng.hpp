#pragma once

#include <cstdint>
#include <initializer_list>

namespace evoshift {

/// Child seed for an independent random stream identified by `tags`
/// (e.g. {generation, candidate index}). Pure function of its inputs.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> tags);

namespace stream {
// Stream tags used across the library so that no two consumers share a stream.
inline constexpr std::uint64_t kInit = 1;
inline constexpr std::uint64_t kSurrogate = 2;
inline constexpr std::uint64_t kDiscriminator = 3;
inline constexpr std::uint64_t kSubset = 4;
inline constexpr std::uint64_t kSampling = 5;
inline constexpr std::uint64_t kDiagnostic = 6;
inline constexpr std::uint64_t kComparison = 7;
}  // namespace stream

}  // namespace evoshift
