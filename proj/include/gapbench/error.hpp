#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gapbench {

enum class ErrorCode {
  Load,
  Validation,
  Parse,
  ExcludedQuantity,
  Normalization,
  Precondition,
  Config,
  FixtureMissing,
  Transport,
  Consistency,
  SchemaMismatch,
  Io,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Load: return "load-error";
    case ErrorCode::Validation: return "validation-error";
    case ErrorCode::Parse: return "parse-error";
    case ErrorCode::ExcludedQuantity: return "excluded-quantity";
    case ErrorCode::Normalization: return "normalization-error";
    case ErrorCode::Precondition: return "precondition-violation";
    case ErrorCode::Config: return "config-error";
    case ErrorCode::FixtureMissing: return "fixture-missing";
    case ErrorCode::Transport: return "transport-error";
    case ErrorCode::Consistency: return "consistency-error";
    case ErrorCode::SchemaMismatch: return "schema-mismatch";
    case ErrorCode::Io: return "io-error";
  }
  return "error";
}

/// Every failure the library raises carries a stable machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace gapbench
