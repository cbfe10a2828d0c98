#include "cvinfer/error.hpp"

namespace cvinfer {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_fold_count: return "invalid-fold-count";
    case ErrorCode::malformed_loss_matrix: return "malformed-loss-matrix";
    case ErrorCode::singular_system: return "singular-system";
    case ErrorCode::invalid_input: return "invalid-input";
    case ErrorCode::invalid_configuration: return "invalid-configuration";
    case ErrorCode::leverage_singularity: return "leverage-singularity";
    case ErrorCode::within_fold_undefined: return "within-fold-undefined";
    case ErrorCode::inconsistent_inputs: return "inconsistent-inputs";
    case ErrorCode::invalid_probability: return "invalid-probability";
    case ErrorCode::inconclusive_degenerate: return "inconclusive-degenerate";
    case ErrorCode::insufficient_data: return "insufficient-data";
    case ErrorCode::insufficient_folds: return "insufficient-folds";
    case ErrorCode::insufficient_repetitions: return "insufficient-repetitions";
    case ErrorCode::degenerate_diagnostic: return "degenerate-diagnostic";
    case ErrorCode::io_error: return "io-error";
    case ErrorCode::usage: return "usage";
  }
  return "unknown";
}

}  // namespace cvinfer
