#include "evoshift/arch.hpp"

#include <charconv>
#include <sstream>

#include "evoshift/error.hpp"

namespace evoshift {

namespace {

// Parses the leading decimal integer of `token`; returns the remaining suffix.
std::string_view split_count(std::string_view token, long long& value) {
  std::size_t digits = 0;
  while (digits < token.size() && (token[digits] >= '0' && token[digits] <= '9')) ++digits;
  if (digits == 0) {
    value = -1;
    return token;
  }
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + digits, value);
  if (ec != std::errc() || ptr != token.data() + digits)
    throw Error(ErrorCode::UnknownToken, "bad integer in token '" + std::string(token) + "'");
  return token.substr(digits);
}

int positive_extent(long long value, std::string_view token) {
  if (value <= 0 || value > 1'000'000)
    throw Error(ErrorCode::NonPositiveExtent, "extent must be positive in '" + std::string(token) + "'");
  return static_cast<int>(value);
}

LayerSpec parse_token(std::string_view token) {
  if (token == "P") return MaxPoolSpec{};
  long long count = -1;
  const auto rest = split_count(token, count);
  if (count < 0) throw Error(ErrorCode::UnknownToken, "unrecognised layer token '" + std::string(token) + "'");

  if (rest == "FC") return FullyConnectedSpec{positive_extent(count, token)};
  if (rest == "S") return SoftmaxSpec{positive_extent(count, token)};
  if (!rest.empty() && rest.front() == 'C') {
    long long kernel = -1;
    const auto tail = split_count(rest.substr(1), kernel);
    if (kernel < 0 || !tail.empty())
      throw Error(ErrorCode::UnknownToken, "unrecognised layer token '" + std::string(token) + "'");
    const int k = positive_extent(kernel, token);
    if (k % 2 == 0) throw Error(ErrorCode::NonPositiveExtent, "conv kernel must be odd in '" + std::string(token) + "'");
    return ConvSpec{positive_extent(count, token), k};
  }
  throw Error(ErrorCode::UnknownToken, "unrecognised layer token '" + std::string(token) + "'");
}

}  // namespace

int NetworkSpec::num_classes() const {
  if (layers.empty() || !std::holds_alternative<SoftmaxSpec>(layers.back()))
    throw Error(ErrorCode::MissingSoftmaxTerminal, "network does not end in a softmax layer");
  return std::get<SoftmaxSpec>(layers.back()).num_classes;
}

NetworkSpec parse_arch(std::string_view text) {
  NetworkSpec spec;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto dash = text.find('-', start);
    const auto end = dash == std::string_view::npos ? text.size() : dash;
    const auto token = text.substr(start, end - start);
    if (token.empty()) throw Error(ErrorCode::UnknownToken, "empty layer token in '" + std::string(text) + "'");
    spec.layers.push_back(parse_token(token));
    if (dash == std::string_view::npos) break;
    start = dash + 1;
  }
  for (std::size_t i = 0; i + 1 < spec.layers.size(); ++i)
    if (std::holds_alternative<SoftmaxSpec>(spec.layers[i]))
      throw Error(ErrorCode::MissingSoftmaxTerminal, "softmax layer must be the last token");
  spec.num_classes();
  return spec;
}

std::string to_string(const NetworkSpec& spec) {
  std::ostringstream out;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    if (i) out << '-';
    std::visit(
        [&out](const auto& layer) {
          using T = std::decay_t<decltype(layer)>;
          if constexpr (std::is_same_v<T, ConvSpec>)
            out << layer.out_channels << 'C' << layer.kernel_size;
          else if constexpr (std::is_same_v<T, MaxPoolSpec>)
            out << 'P';
          else if constexpr (std::is_same_v<T, FullyConnectedSpec>)
            out << layer.out_units << "FC";
          else
            out << layer.num_classes << 'S';
        },
        spec.layers[i]);
  }
  return out.str();
}

}  // namespace evoshift
