#pragma once

#include <stdexcept>
#include <string>

namespace mgp {

// Every failure mode the engine can raise. The names are part of the CLI
// contract: they are printed verbatim as `code=<kind>` on stderr.
enum class ErrorKind {
  NotPositiveDefinite,
  DimensionMismatch,
  ShapeMismatch,
  NonScalarRoot,
  SingularAtEndpoint,
  MixedFrameCounts,
  NonFiniteEnergy,
  BadChannelIndex,
  DataConfigMismatch,
  ConfigMismatch,
  EmptyDataset,
  GlyphTooLarge,
  BadMagic,
  VersionMismatch,
  TruncatedFile,
  ConfigError,
  IoError,
  Internal,
};

// Process exit codes: 0 ok, 2 config error, 3 data error, 4 numeric failure.
enum class ErrorCategory { Config = 2, Data = 3, Numeric = 4 };

const char* to_string(ErrorKind kind);
ErrorCategory category(ErrorKind kind);

class MgpError : public std::runtime_error {
 public:
  MgpError(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}

  ErrorKind kind() const { return kind_; }
  int exit_code() const { return static_cast<int>(category(kind_)); }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& msg) {
  throw MgpError(kind, msg);
}

}  // namespace mgp
