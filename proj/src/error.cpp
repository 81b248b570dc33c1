#include "evoshift/error.hpp"

namespace evoshift {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownToken: return "UnknownToken";
    case ErrorCode::MissingSoftmaxTerminal: return "MissingSoftmaxTerminal";
    case ErrorCode::NonPositiveExtent: return "NonPositiveExtent";
    case ErrorCode::ShapeUnderflow: return "ShapeUnderflow";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::BadDimension: return "BadDimension";
    case ErrorCode::EigenFailure: return "EigenFailure";
    case ErrorCode::PopulationSizeMismatch: return "PopulationSizeMismatch";
    case ErrorCode::NonFiniteFitness: return "NonFiniteFitness";
    case ErrorCode::NoHistory: return "NoHistory";
    case ErrorCode::ClassCountMismatch: return "ClassCountMismatch";
    case ErrorCode::TooManyPixels: return "TooManyPixels";
    case ErrorCode::ClassRowOverflow: return "ClassRowOverflow";
    case ErrorCode::SizeMismatch: return "SizeMismatch";
    case ErrorCode::ArchitectureMismatch: return "ArchitectureMismatch";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::CountMismatch: return "CountMismatch";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::Io: return "Io";
    case ErrorCode::BadFormat: return "BadFormat";
  }
  return "Unknown";
}

}  // namespace evoshift
