#pragma once

// Learning algorithms, prediction rules and point losses.

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cvinfer/data.hpp"

namespace cvinfer {

/// Largest feature dimension accepted by ridge and logistic regression.
inline constexpr std::size_t kMaxLinearDim = 64;

enum class LossType { squared_error, zero_one, excess_squared };

struct LossFunction {
  LossType type = LossType::squared_error;
  /// Reference prediction `a` of the excess squared loss (y - f)^2 - (y - a)^2.
  double anchor = 0.0;

  static LossFunction squared_error() { return {LossType::squared_error, 0.0}; }
  static LossFunction zero_one() { return {LossType::zero_one, 0.0}; }
  static LossFunction excess_squared(double a) { return {LossType::excess_squared, a}; }
};

enum class AlgorithmKind { constant, sample_mean, surrogate_mean, ridge, knn, logistic };

/// Configuration of a learning algorithm. JSON form, for example
///   {"algo": "ridge", "lambda": 1.0, "standardize": true}
///   {"algo": "knn", "neighbors": 5}
///   {"algo": "logistic", "l2": 1.0}
struct AlgorithmSpec {
  AlgorithmKind kind = AlgorithmKind::sample_mean;
  double constant = 0.0;         // constant
  double lambda = 1.0;           // ridge penalty
  std::size_t neighbors = 5;     // knn
  double l2 = 1.0;               // logistic penalty strength
  std::size_t iterations = 500;  // logistic gradient steps
  double step_scale = 0.1;       // logistic step size is step_scale / n
  bool intercept = true;         // logistic only; ridge never fits one
  bool standardize = false;      // scale features by training statistics

  static AlgorithmSpec constant_value(double c);
  static AlgorithmSpec sample_mean();
  static AlgorithmSpec surrogate_mean();
  static AlgorithmSpec ridge(double lambda, bool standardize = false);
  static AlgorithmSpec knn(std::size_t neighbors = 5, bool standardize = false);
  static AlgorithmSpec logistic(double l2, bool standardize = false);
};

/// Prediction f(x) = offset + <coefficients, x> for rules that are affine in x.
struct AffineForm {
  double offset = 0.0;
  std::vector<double> coefficients;
};

/// A fitted prediction rule. Immutable; copies share the knn training snapshot.
class PredictionRule {
 public:
  AlgorithmKind kind() const noexcept { return kind_; }

  /// Real-valued prediction: a regression value, or for logistic regression
  /// the fitted probability, for knn the neighbour average.
  double predict(std::span<const double> x) const;

  /// True when the rule is usable with the 0-1 loss (score thresholded at 0.5).
  bool classifies() const noexcept;

  /// Set for constant, sample-mean, surrogate-mean and ridge rules.
  std::optional<AffineForm> affine_form() const;
  /// Set when the prediction does not depend on x.
  std::optional<double> constant_prediction() const;

  const std::vector<double>& weights() const noexcept { return weights_; }
  double bias() const noexcept { return bias_; }

 private:
  friend PredictionRule fit(const AlgorithmSpec&, const Dataset&, std::span<const std::size_t>);

  struct Snapshot {
    std::vector<double> features;  // row-major, already standardized
    std::vector<double> targets;
  };

  void scale_into(std::span<const double> x, std::vector<double>& out) const;

  AlgorithmKind kind_ = AlgorithmKind::constant;
  std::size_t dim_ = 0;
  double bias_ = 0.0;
  std::vector<double> weights_;
  std::size_t neighbors_ = 0;
  std::shared_ptr<const Snapshot> snapshot_;
  std::vector<double> center_;
  std::vector<double> scale_;
};

/// Fits `spec` on the rows of `data` listed in `train`.
PredictionRule fit(const AlgorithmSpec& spec, const Dataset& data,
                   std::span<const std::size_t> train);
/// Fits on every row.
PredictionRule fit(const AlgorithmSpec& spec, const Dataset& data);

/// Label of a real-valued score under the 0.5 threshold.
inline double predicted_label(double score) noexcept { return score >= 0.5 ? 1.0 : 0.0; }

/// Loss of a prediction (score) against a target. Throws invalid-configuration
/// for 0-1 loss with a rule that does not classify.
double loss_value(const LossFunction& loss, double prediction, double target, bool classifies);

double point_loss(const PredictionRule& rule, const LossFunction& loss, DataPoint point);

/// Leave-one-out squared-error losses of ridge regression (no intercept, raw
/// features) computed from a single factorization of X'X + lambda I with the
/// Sherman-Morrison-Woodbury rank-one downdate. Fold i holds point i.
LossMatrix ridge_loocv_losses(const Dataset& data, double lambda);

/// Penalized logistic objective sum_i log(1 + exp(-s_i * t_i)) + (l2 / 2) |w|^2
/// where t_i = b + <w, x_i> and s_i = 2 y_i - 1. The parameter vector is
/// (w_1..w_p, b) when an intercept is fitted.
struct LogisticObjective {
  const Dataset* data;
  std::span<const std::size_t> rows;
  double l2;
  bool intercept;

  double value(std::span<const double> params) const;
  std::vector<double> gradient(std::span<const double> params) const;
};

nlohmann::json to_json(const AlgorithmSpec& spec);
AlgorithmSpec algorithm_from_json(const nlohmann::json& j);
nlohmann::json to_json(const LossFunction& loss);
/// Accepts "squared_error" or {"kind": "excess_squared", "anchor": 1.0}.
LossFunction loss_from_json(const nlohmann::json& j);

std::string to_string(AlgorithmKind kind);
std::string to_string(LossType type);

}  // namespace cvinfer
