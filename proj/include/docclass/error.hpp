#pragma once

#include <stdexcept>
#include <string>

namespace docclass {

enum class ErrorKind {
  InvalidSpace,
  InvalidRaster,
  TooSmall,
  DimensionMismatch,
  Validation,
  DegenerateTraining,
  IncompleteDataset,
  InsufficientData,
  EmptyGrid,
  UndefinedImpact,
  MissingFile,
  MalformedImage,
  UnknownLabel,
  UnsupportedVersion,
  Corrupted,
  InvalidSpec,
  Io,
};

const char* to_string(ErrorKind kind);

/// Every failure raised by the library carries a kind so callers (the CLI in
/// particular) can map it onto exit codes without parsing messages.
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

}  // namespace docclass
