#pragma once

// Monte Carlo estimates of the stability functionals and variance parameters
// of a learning algorithm on a synthetic task. Everything here needs a
// generator: these are population quantities.
//
// With m the training size and h(z, Z) the loss (or loss difference) at z of
// the rule fitted on Z = Z_{1:m}, Z\i the set with point i replaced by an
// independent copy and h'(z, Z) = h(z, Z) - E[h(Z0, Z) | Z]:
//
//   gamma_ms     E[(h(Z0, Z) - h(Z0, Z\i))^2]
//   gamma_loss   E[(h'(Z0, Z) - h'(Z0, Z\i))^2]
//   gamma_4      E[(h'(Z0, Z) - h'(Z0, Z\i))^4]
//   sigma2       Var(hbar(Z0)),  hbar(z) = E[h(z, Z)]
//   sigma2_tilde E[Var(h(Z0, Z) | Z)]
//   cond_var     E[Var_{Z0}(h(Z0, Z) - hbar(Z0))]  (= sigma2_tilde - sigma2)

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cvinfer/cv.hpp"
#include "cvinfer/generators.hpp"

namespace cvinfer {

struct StabilityOptions {
  /// Replicates of (Z, Z', i) for the gamma functionals.
  std::size_t replicates = 1000;
  /// Fresh test points per replicate used to integrate over Z0.
  std::size_t inner = 200;
  /// Average over every swap index instead of drawing one (m <= 50 only).
  bool exhaustive = false;
  /// Crossed design for the variance parameters: `batches` independent
  /// batches, each with `train_sets` training sets scored on `test_points`
  /// common test points.
  std::size_t batches = 20;
  std::size_t train_sets = 20;
  std::size_t test_points = 200;
  /// Cross-validation runs for the variance-ratio diagnostic.
  std::size_t outer_reps = 500;
  /// Monte Carlo points for R_n when the task has no closed-form risk.
  std::size_t n_mc = 20000;
  std::size_t workers = 1;
  std::uint64_t seed = 0;
};

/// `value` is `raw` clamped at zero for quantities that cannot be negative.
struct McEstimate {
  double value = 0.0;
  double raw = 0.0;
  double standard_error = 0.0;
};

struct StabilityEstimates {
  McEstimate gamma_ms;
  McEstimate gamma_loss;
  McEstimate gamma_4;
  /// gamma_ms - gamma_loss from the same replicates (paired standard error).
  McEstimate ms_minus_loss;
  std::size_t m = 0;
  std::size_t replicates = 0;
  std::vector<std::string> warnings;
};

struct VarianceParams {
  McEstimate sigma2;
  McEstimate sigma2_tilde;
  McEstimate cond_var_mean;
  /// sigma2_tilde - sigma2 with its between-batch standard error.
  McEstimate tilde_gap;
  std::size_t m = 0;
  std::size_t replicates = 0;  // batches * train_sets
  std::vector<std::string> warnings;
};

struct VarianceRatio {
  /// Var(sqrt(n) (R_hat - R_n)) / sigma2.
  McEstimate ratio;
  double scaled_error_variance = 0.0;
  double sigma2 = 0.0;
  std::size_t outer_reps = 0;
  std::vector<std::string> warnings;
};

struct StabilityReport {
  std::size_t n = 0;
  std::size_t k = 0;
  std::size_t m = 0;
  McEstimate gamma_ms;
  McEstimate gamma_loss;
  McEstimate gamma_4;
  McEstimate sigma2;
  McEstimate sigma2_tilde;
  McEstimate cond_var_mean;
  std::optional<McEstimate> variance_ratio;
  std::size_t mc_replicates = 0;
  std::vector<std::string> warnings;
};

/// Training size m = n - ceil(n / k) of a k-fold split of n points.
std::size_t training_size(std::size_t n, std::size_t k);

/// One swap index per replicate, drawn uniformly, unless options.exhaustive.
/// gamma_loss uses the N+1 test points of a replicate to estimate the
/// centring term: the unbiased sample variance (denominator N) of the
/// differences over those points. gamma_4 uses their central fourth moment.
StabilityEstimates estimate_stabilities(const Generator& task, const Comparison& cmp,
                                        std::size_t n, std::size_t k,
                                        const StabilityOptions& options);

/// Two-way analysis of variance of the train-set x test-point loss table of
/// each batch; standard errors come from the spread across batches.
VarianceParams estimate_variance_params(const Generator& task, const Comparison& cmp,
                                        std::size_t n, std::size_t k,
                                        const StabilityOptions& options);

/// Runs options.outer_reps independent k-fold CV runs, scores each against its
/// exact (or Monte Carlo) k-fold test error and divides the variance of
/// sqrt(n) (R_hat - R_n) by sigma2. Without a supplied sigma2 it is estimated
/// with estimate_variance_params. Throws degenerate-diagnostic when sigma2 is
/// not positive.
VarianceRatio variance_ratio_diagnostic(const Generator& task, const Comparison& cmp,
                                        std::size_t n, std::size_t k,
                                        const StabilityOptions& options,
                                        std::optional<McEstimate> sigma2 = std::nullopt);

/// All of the above; the variance ratio is skipped when outer_reps == 0.
StabilityReport stability_report(const Generator& task, const Comparison& cmp, std::size_t n,
                                 std::size_t k, const StabilityOptions& options);

nlohmann::json to_json(const McEstimate& e);
McEstimate mc_estimate_from_json(const nlohmann::json& j);
nlohmann::json to_json(const StabilityReport& r);
StabilityReport stability_report_from_json(const nlohmann::json& j);

}  // namespace cvinfer
