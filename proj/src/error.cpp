#include "nlslab/error.hpp"

namespace nlslab {

const char* kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidDimension: return "invalid-dimension";
    case ErrorKind::InsufficientResolution: return "insufficient-resolution";
    case ErrorKind::GridMismatch: return "grid-mismatch";
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::UnsupportedExponent: return "unsupported-exponent";
    case ErrorKind::RadiusOutOfRange: return "radius-out-of-range";
    case ErrorKind::DomainEscape: return "domain-escape";
    case ErrorKind::SingularResolvent: return "singular-resolvent";
    case ErrorKind::TruncationNotConverged: return "truncation-not-converged";
    case ErrorKind::NanDetected: return "nan-detected";
    case ErrorKind::StepTooLarge: return "step-too-large";
    case ErrorKind::FixedPointNotConverged: return "fixed-point-not-converged";
    case ErrorKind::NotConverged: return "not-converged";
    case ErrorKind::CollapsedToZero: return "collapsed-to-zero";
    case ErrorKind::NoSolution: return "no-solution";
    case ErrorKind::UndersampledInterval: return "undersampled-interval";
    case ErrorKind::ConfigInvalid: return "config-invalid";
    case ErrorKind::MissingRun: return "missing-run";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(kind_name(kind)) + ": " + what), kind_(kind) {}

}  // namespace nlslab

#include <atomic>
#include <iostream>

namespace nlslab {

namespace {
void stderr_sink(const std::string& message) { std::cerr << "warning: " << message << '\n'; }
std::atomic<void (*)(const std::string&)> current_sink{&stderr_sink};
}  // namespace

void warn(const std::string& message) { current_sink.load()(message); }

void set_warning_sink(void (*sink)(const std::string&)) {
  current_sink.store(sink ? sink : &stderr_sink);
}

}  // namespace nlslab
