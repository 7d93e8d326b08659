#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hierslu {

enum class ErrorCode {
  MalformedLine,
  IntentInMultipleDomains,
  EmptyCorpus,
  DimensionMismatch,
  UnreadableFile,
  UnknownIntent,
  ShapeMismatch,
  NotScalarLoss,
  EmptySequence,
  EmptyIntentSet,
  IndexOutOfRange,
  NonFiniteLoss,
  InsufficientLabels,
  MissingEmbedding,
  UnknownEntry,
  InvalidArgument,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::IntentInMultipleDomains: return "IntentInMultipleDomains";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::UnreadableFile: return "UnreadableFile";
    case ErrorCode::UnknownIntent: return "UnknownIntent";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NotScalarLoss: return "NotScalarLoss";
    case ErrorCode::EmptySequence: return "EmptySequence";
    case ErrorCode::EmptyIntentSet: return "EmptyIntentSet";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::InsufficientLabels: return "InsufficientLabels";
    case ErrorCode::MissingEmbedding: return "MissingEmbedding";
    case ErrorCode::UnknownEntry: return "UnknownEntry";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace hierslu
