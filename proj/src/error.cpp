#include "docclass/error.hpp"

namespace docclass {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidSpace: return "invalid-space";
    case ErrorKind::InvalidRaster: return "invalid-raster";
    case ErrorKind::TooSmall: return "too-small";
    case ErrorKind::DimensionMismatch: return "dimension-mismatch";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::DegenerateTraining: return "degenerate-training";
    case ErrorKind::IncompleteDataset: return "incomplete-dataset";
    case ErrorKind::InsufficientData: return "insufficient-data";
    case ErrorKind::EmptyGrid: return "empty-grid";
    case ErrorKind::UndefinedImpact: return "undefined-impact";
    case ErrorKind::MissingFile: return "missing-file";
    case ErrorKind::MalformedImage: return "malformed-image";
    case ErrorKind::UnknownLabel: return "unknown-label";
    case ErrorKind::UnsupportedVersion: return "unsupported-version";
    case ErrorKind::Corrupted: return "corrupted";
    case ErrorKind::InvalidSpec: return "invalid-spec";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

}  // namespace docclass
