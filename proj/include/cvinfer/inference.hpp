#pragma once

// Normal-theory confidence intervals for the k-fold test error and the
// one-sided test of whether one algorithm improves on another.

#include <cstddef>
#include <optional>
#include <string>

#include <json.hpp>

#include "cvinfer/data.hpp"
#include "cvinfer/estimators.hpp"

namespace cvinfer {

enum class Decision { reject, fail_to_reject, inconclusive };

/// Outcome of one inference procedure. Every procedure reports both the
/// two-sided interval and the one-sided test of H0: R >= 0 vs H1: R < 0 built
/// from the same point estimate and standard error:
///
///   interval     r_hat -/+ c(1 - alpha/2) * standard_error
///   reject H0    iff r_hat < c(alpha) * standard_error
///   p_value      F(r_hat / standard_error)
///
/// where c and F are the normal (df unset) or Student t quantile and CDF.
struct InferenceResult {
  std::string procedure;
  double r_hat = 0.0;
  double sigma_hat = 0.0;
  double standard_error = 0.0;
  std::size_t n = 0;
  double alpha = 0.05;
  double ci_low = 0.0;
  double ci_high = 0.0;
  Decision decision = Decision::fail_to_reject;
  double p_value = 1.0;
  /// Upper end of the one-sided interval (-inf, r_hat - c(alpha) * se];
  /// H0 is rejected exactly when it is below zero.
  double one_sided_upper = 0.0;
  std::optional<double> df;
  /// Set when the standard error is zero; the interval collapses to r_hat.
  bool degenerate = false;
  std::string estimator;
  /// The test error this procedure's interval targets.
  std::string target;
};

/// Builds a result from a point estimate and its standard error
/// `sigma_hat * se_scale`. With zero standard error the decision is reject
/// (p = 0) for r_hat < 0, fail_to_reject (p = 1) for r_hat > 0 and
/// inconclusive (p = 1) for r_hat == 0.
InferenceResult make_inference(std::string procedure, double r_hat, double sigma_hat,
                               double se_scale, std::size_t n, double alpha,
                               std::optional<double> df = std::nullopt);

/// r_hat -/+ q(1 - alpha/2) sigma_hat / sqrt(n). Throws invalid-probability
/// for alpha outside (0, 1).
InferenceResult clt_interval(double r_hat, double sigma_hat, std::size_t n, double alpha);

InferenceResult clt_confidence_interval(const LossMatrix& m, Estimator estimator, double alpha);

/// Requires a difference matrix (invalid-input otherwise). Throws
/// inconclusive-degenerate when every difference is identical and zero.
InferenceResult clt_improvement_test(const LossMatrix& m, Estimator estimator, double alpha);

std::string to_string(Decision d);

nlohmann::json to_json(const InferenceResult& r);
InferenceResult inference_result_from_json(const nlohmann::json& j);

}  // namespace cvinfer
