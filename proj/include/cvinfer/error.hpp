#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cvinfer {

enum class ErrorCode {
  invalid_fold_count,
  malformed_loss_matrix,
  singular_system,
  invalid_input,
  invalid_configuration,
  leverage_singularity,
  within_fold_undefined,
  inconsistent_inputs,
  invalid_probability,
  inconclusive_degenerate,
  insufficient_data,
  insufficient_folds,
  insufficient_repetitions,
  degenerate_diagnostic,
  io_error,
  usage,
};

/// Stable kebab-case name, used in JSON error payloads.
std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cvinfer
