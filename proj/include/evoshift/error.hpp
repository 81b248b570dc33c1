#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace evoshift {

enum class ErrorCode {
  // nn-engine
  UnknownToken,
  MissingSoftmaxTerminal,
  NonPositiveExtent,
  ShapeUnderflow,
  ShapeMismatch,
  EmptyDataset,
  // optim
  LengthMismatch,
  InvalidConfig,
  // cmaes
  BadDimension,
  EigenFailure,
  PopulationSizeMismatch,
  NonFiniteFitness,
  NoHistory,
  // perturb
  ClassCountMismatch,
  TooManyPixels,
  ClassRowOverflow,
  // fitness / harness
  SizeMismatch,
  ArchitectureMismatch,
  BadMagic,
  CountMismatch,
  TruncatedFile,
  Io,
  BadFormat,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so that
/// callers (tests, the CLI) can branch on the kind rather than the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace evoshift
