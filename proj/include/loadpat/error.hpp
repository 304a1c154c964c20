#pragma once

#include <stdexcept>
#include <string>

namespace loadpat {

/// Broad failure class; the CLI maps each onto an exit code.
enum class ErrorKind {
  Config = 2,
  Data = 3,
  Numeric = 4,
};

/// Specific failure codes raised by the library modules.
enum class ErrorCode {
  MissingColumn,
  EmptyInput,
  AllConsumersDropped,
  Degenerate,
  UnknownCategory,
  MissingAttribute,
  TooFewPoints,
  NoKnee,
  NoProfilesForConsumer,
  EmptyColumn,
  LengthMismatch,
  TooManyFeatures,
  MissingFeature,
  LabelOutOfRange,
  BadShape,
  ShapeMismatch,
  Diverged,
  Empty,
  ConsumerMismatch,
  BadConfig,
  Io,
};

const char* to_string(ErrorCode code);
ErrorKind kind_of(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  ErrorKind kind() const noexcept { return kind_of(code_); }

 protected:
  struct Verbatim {};
  Error(ErrorCode code, const std::string& message, Verbatim) : std::runtime_error(message), code_(code) {}

 private:
  ErrorCode code_;
};

/// Wraps a module error with the name of the pipeline stage that raised it.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& inner)
      : Error(inner.code(), "[" + stage + "] " + inner.what(), Verbatim{}), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace loadpat
