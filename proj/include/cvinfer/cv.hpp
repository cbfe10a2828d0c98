#pragma once

// k-fold cross-validation of one algorithm, or of the loss difference between
// two algorithms, and the conditional test-error target it estimates.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cvinfer/data.hpp"
#include "cvinfer/generators.hpp"
#include "cvinfer/learners.hpp"

namespace cvinfer {

/// What is being cross-validated: the loss of `first`, or when `second` is set
/// the difference loss(first) - loss(second). Negative values favour `first`.
struct Comparison {
  AlgorithmSpec first;
  std::optional<AlgorithmSpec> second;
  LossFunction loss;

  LossKind kind() const noexcept {
    return second ? LossKind::difference : LossKind::plain;
  }
};

nlohmann::json to_json(const Comparison& cmp);
/// {"algo": {...}, "loss": ...} or {"algo1": {...}, "algo2": {...}, "loss": ...}
Comparison comparison_from_json(const nlohmann::json& j);

/// A train/validation split with its fitted rule(s) and held-out losses.
struct SplitFit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  PredictionRule first;
  std::optional<PredictionRule> second;
  /// losses[r] belongs to validation[r].
  std::vector<double> losses;

  double mean_loss() const;
};

SplitFit fit_split(const Dataset& data, std::vector<std::size_t> train,
                   std::vector<std::size_t> validation, const Comparison& cmp);

struct CvRun {
  FoldPartition partition;
  LossMatrix losses;
  std::vector<double> fold_means;
  double r_hat = 0.0;
  std::vector<SplitFit> fits;
};

/// Fits on each training fold and evaluates on its validation fold. Folds are
/// fitted on up to `workers` threads; the result does not depend on it.
CvRun run_cv(const Dataset& data, const FoldPartition& partition, const Comparison& cmp,
             std::size_t workers = 1);
CvRun run_cv(const Dataset& data, const FoldPartition& partition, const AlgorithmSpec& algo,
             const LossFunction& loss, std::size_t workers = 1);
CvRun run_comparison(const Dataset& data, const FoldPartition& partition,
                     const AlgorithmSpec& first, const AlgorithmSpec& second,
                     const LossFunction& loss, std::size_t workers = 1);

/// JSON summary {r_hat, fold_means, k, n, loss_kind}.
nlohmann::json summarize(const CvRun& run);

enum class RiskMethod {
  automatic,   // closed form when the task offers it, else Monte Carlo
  monte_carlo  // always sample fresh labelled points
};

struct RiskEstimate {
  double value = 0.0;
  double standard_error = 0.0;
  std::size_t n_mc = 0;  // 0 when the value is exact
  std::vector<std::string> warnings;
};

/// Conditional risk of a single split's rule (or rule difference) under `task`.
RiskEstimate split_risk(const SplitFit& fit, const Generator& task, const LossFunction& loss,
                        std::size_t n_mc, Rng& rng, RiskMethod method = RiskMethod::automatic);

/// Weighted combination sum_s weights[s] * E[h(Z0, Z_{train_s}) | Z_{train_s}].
/// All splits are scored on one common pool of n_mc fresh points, so the
/// estimate of a difference of risks benefits from common random numbers.
/// Fewer than 1000 Monte Carlo points records a warning.
RiskEstimate true_risk_oracle(std::span<const SplitFit> fits, std::span<const double> weights,
                              const Generator& task, const LossFunction& loss, std::size_t n_mc,
                              std::uint64_t seed, RiskMethod method = RiskMethod::automatic);

RiskEstimate true_risk_oracle(std::span<const std::shared_ptr<const SplitFit>> fits,
                              std::span<const double> weights, const Generator& task,
                              const LossFunction& loss, std::size_t n_mc, std::uint64_t seed,
                              RiskMethod method = RiskMethod::automatic);

/// The k-fold test error of a cross-validation run: fold rules weighted by
/// their validation share |B_j'| / n (1/k for equal folds).
RiskEstimate true_risk_oracle(const CvRun& run, const Generator& task, const LossFunction& loss,
                              std::size_t n_mc, std::uint64_t seed,
                              RiskMethod method = RiskMethod::automatic);

}  // namespace cvinfer
