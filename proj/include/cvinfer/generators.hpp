#pragma once

// Synthetic data-generating tasks. Each task samples i.i.d. datasets and, where
// it can, reports the exact conditional risk of a fitted rule so that coverage
// can be scored against the true target instead of a Monte Carlo surrogate.

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cvinfer/data.hpp"
#include "cvinfer/learners.hpp"
#include "cvinfer/random.hpp"

namespace cvinfer {

class Generator {
 public:
  virtual ~Generator() = default;

  virtual std::string name() const = 0;
  virtual Dataset sample(std::size_t n, Rng& rng) const = 0;

  /// E[loss(Y0, rule(X0))] for a fresh point, in closed form.
  virtual std::optional<double> exact_risk(const PredictionRule& /*rule*/,
                                           const LossFunction& /*loss*/) const {
    return std::nullopt;
  }

  /// E[loss(Y0, prediction) | X0 = x], integrating out label noise only.
  virtual std::optional<double> expected_loss_at(std::span<const double> /*x*/,
                                                 double /*prediction*/,
                                                 const LossFunction& /*loss*/,
                                                 bool /*classifies*/) const {
    return std::nullopt;
  }

  virtual nlohmann::json to_json() const = 0;
};

/// Featureless points Z ~ N(mean, variance) stored as targets.
class GaussianLocation final : public Generator {
 public:
  GaussianLocation(double mean, double variance);

  std::string name() const override { return "gaussian_location"; }
  Dataset sample(std::size_t n, Rng& rng) const override;
  std::optional<double> exact_risk(const PredictionRule& rule,
                                   const LossFunction& loss) const override;
  nlohmann::json to_json() const override;

  double mean() const noexcept { return mean_; }
  double variance() const noexcept { return variance_; }

 private:
  double mean_;
  double variance_;
};

/// One feature X = mean + x_scale * T (T Student t with x_df degrees of
/// freedom, or standard normal when x_df == 0) and an independent target
/// Y = mean + y_sd * N(0, 1). Both have expectation `mean`.
class SurrogateMeanTask final : public Generator {
 public:
  SurrogateMeanTask(double mean, double x_scale, int x_df, double y_sd);

  std::string name() const override { return "surrogate_mean"; }
  Dataset sample(std::size_t n, Rng& rng) const override;
  std::optional<double> exact_risk(const PredictionRule& rule,
                                   const LossFunction& loss) const override;
  nlohmann::json to_json() const override;

  /// Var(X0); infinite when x_df <= 2.
  double feature_variance() const noexcept;
  double target_variance() const noexcept { return y_sd_ * y_sd_; }

 private:
  double mean_;
  double x_scale_;
  int x_df_;
  double y_sd_;
};

/// X ~ N(0, I_p), Y = <beta, X> + noise_sd * N(0, 1).
class LinearGaussian final : public Generator {
 public:
  LinearGaussian(std::vector<double> beta, double noise_sd);

  std::string name() const override { return "linear_gaussian"; }
  Dataset sample(std::size_t n, Rng& rng) const override;
  std::optional<double> exact_risk(const PredictionRule& rule,
                                   const LossFunction& loss) const override;
  std::optional<double> expected_loss_at(std::span<const double> x, double prediction,
                                         const LossFunction& loss,
                                         bool classifies) const override;
  nlohmann::json to_json() const override;

 private:
  std::vector<double> beta_;
  double noise_sd_;
};

/// X ~ N(0, I_p), Y ~ Bernoulli(1 / (1 + exp(-<beta, X>))). The default beta
/// alternates +scale, -scale, +scale, ... across coordinates.
class LogisticLabels final : public Generator {
 public:
  explicit LogisticLabels(std::vector<double> beta);
  static std::vector<double> alternating_beta(std::size_t dim, double scale = 1.0);

  std::string name() const override { return "logistic_labels"; }
  Dataset sample(std::size_t n, Rng& rng) const override;
  std::optional<double> expected_loss_at(std::span<const double> x, double prediction,
                                         const LossFunction& loss,
                                         bool classifies) const override;
  nlohmann::json to_json() const override;

  double probability(std::span<const double> x) const noexcept;

 private:
  std::vector<double> beta_;
};

/// One discrete feature uniform on {0, ..., levels-1} and a target
/// Y ~ N(0, noise_sd^2) independent of it. With few levels nearly every point
/// has exact duplicates in feature space, which makes 1-nearest-neighbour
/// predictions hinge on single training labels.
class DiscreteDuplicates final : public Generator {
 public:
  DiscreteDuplicates(std::size_t levels, double noise_sd);

  std::string name() const override { return "discrete_duplicates"; }
  Dataset sample(std::size_t n, Rng& rng) const override;
  std::optional<double> exact_risk(const PredictionRule& rule,
                                   const LossFunction& loss) const override;
  std::optional<double> expected_loss_at(std::span<const double> x, double prediction,
                                         const LossFunction& loss,
                                         bool classifies) const override;
  nlohmann::json to_json() const override;

 private:
  std::size_t levels_;
  double noise_sd_;
};

/// Builds a task from its JSON description, e.g.
///   {"kind": "gaussian_location", "mean": 0, "variance": 1}
///   {"kind": "surrogate_mean", "mean": 0, "x_scale": 1, "x_df": 5, "y_sd": 1}
///   {"kind": "linear_gaussian", "beta": [1, -1], "noise_sd": 1}
///   {"kind": "logistic_labels", "dim": 10, "scale": 1}
///   {"kind": "discrete_duplicates", "levels": 2, "noise_sd": 1}
std::unique_ptr<Generator> make_generator(const nlohmann::json& spec);

}  // namespace cvinfer
