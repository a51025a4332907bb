#include "mgp/errors.hpp"

namespace mgp {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::NonScalarRoot: return "NonScalarRoot";
    case ErrorKind::SingularAtEndpoint: return "SingularAtEndpoint";
    case ErrorKind::MixedFrameCounts: return "MixedFrameCounts";
    case ErrorKind::NonFiniteEnergy: return "NonFiniteEnergy";
    case ErrorKind::BadChannelIndex: return "BadChannelIndex";
    case ErrorKind::DataConfigMismatch: return "DataConfigMismatch";
    case ErrorKind::ConfigMismatch: return "ConfigMismatch";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::GlyphTooLarge: return "GlyphTooLarge";
    case ErrorKind::BadMagic: return "BadMagic";
    case ErrorKind::VersionMismatch: return "VersionMismatch";
    case ErrorKind::TruncatedFile: return "TruncatedFile";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::Internal: return "Internal";
  }
  return "Internal";
}

ErrorCategory category(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ConfigError:
    case ErrorKind::ConfigMismatch:
    case ErrorKind::BadChannelIndex:
    case ErrorKind::GlyphTooLarge:
    case ErrorKind::MixedFrameCounts:
      return ErrorCategory::Config;
    case ErrorKind::BadMagic:
    case ErrorKind::VersionMismatch:
    case ErrorKind::TruncatedFile:
    case ErrorKind::EmptyDataset:
    case ErrorKind::DataConfigMismatch:
    case ErrorKind::IoError:
      return ErrorCategory::Data;
    default:
      return ErrorCategory::Numeric;
  }
}

}  // namespace mgp
