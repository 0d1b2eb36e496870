#pragma once

#include <stdexcept>
#include <string>

namespace ovfit {

enum class ErrorKind {
  InvalidParameter,
  EmptySample,
  LengthMismatch,
  RaggedMatrix,
  RangeViolation,
  WeightOutOfRange,
  Precondition,
  Divergence,
  TrainGate,
  OutOfPad,
  EpsilonTooLarge,
  MissingLogits,
  UniverseNotClosed,
  InsufficientRuns,
  Config,
  Io,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidParameter: return "invalid parameter";
    case ErrorKind::EmptySample: return "empty sample";
    case ErrorKind::LengthMismatch: return "length mismatch";
    case ErrorKind::RaggedMatrix: return "ragged matrix";
    case ErrorKind::RangeViolation: return "range violation";
    case ErrorKind::WeightOutOfRange: return "weight out of range";
    case ErrorKind::Precondition: return "precondition";
    case ErrorKind::Divergence: return "divergence";
    case ErrorKind::TrainGate: return "training gate";
    case ErrorKind::OutOfPad: return "out of pad";
    case ErrorKind::EpsilonTooLarge: return "epsilon too large";
    case ErrorKind::MissingLogits: return "missing logits";
    case ErrorKind::UniverseNotClosed: return "universe not closed";
    case ErrorKind::InsufficientRuns: return "insufficient runs";
    case ErrorKind::Config: return "config";
    case ErrorKind::Io: return "io";
  }
  return "error";
}

}  // namespace ovfit
