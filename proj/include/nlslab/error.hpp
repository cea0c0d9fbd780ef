#pragma once

#include <stdexcept>
#include <string>

namespace nlslab {

enum class ErrorKind {
  InvalidDimension,
  InsufficientResolution,
  GridMismatch,
  InvalidArgument,
  UnsupportedExponent,
  RadiusOutOfRange,
  DomainEscape,
  SingularResolvent,
  TruncationNotConverged,
  NanDetected,
  StepTooLarge,
  FixedPointNotConverged,
  NotConverged,
  CollapsedToZero,
  NoSolution,
  UndersampledInterval,
  ConfigInvalid,
  MissingRun,
  Io,
};

const char* kind_name(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace nlslab

namespace nlslab {

// Non-fatal diagnostics (clamped bands, suspect profiles). Default sink is stderr.
void warn(const std::string& message);
void set_warning_sink(void (*sink)(const std::string&));

}  // namespace nlslab
