#pragma once

// The CLT procedure and the five comparison procedures it is evaluated
// against: hold-out, cross-validated t, repeated train-validation t (plain and
// with the Nadeau-Bengio correction) and the 5x2 cross-validated t test.
// Each procedure targets its own test error; ProcedureOutcome records the
// fitted splits and weights that define it.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "cvinfer/cv.hpp"
#include "cvinfer/inference.hpp"

namespace cvinfer {

enum class BaselineKind { holdout, cv_ttest, repeated_tv, corrected_repeated_tv, five_by_two };

struct BaselineSpec {
  BaselineKind kind = BaselineKind::holdout;
  /// Folds (cv_ttest), splits (repeated_tv) or replicates (five_by_two).
  std::size_t repetitions = 10;
  double holdout_fraction = 0.1;
  std::uint64_t seed = 0;

  /// 10 repetitions and a 0.1 validation share, or 5 replicates for 5x2.
  static BaselineSpec defaults(BaselineKind kind, std::uint64_t seed = 0);
};

struct ProcedureOutcome {
  InferenceResult result;
  std::vector<std::shared_ptr<const SplitFit>> splits;
  /// The procedure's target is sum_s target_weights[s] * risk(splits[s]).
  std::vector<double> target_weights;
};

/// Our procedure: normal interval around the k-fold CV error.
ProcedureOutcome clt_procedure(const CvRun& run, Estimator estimator, double alpha);

/// Hold-out: R_hat and the population variance (denominator |S^c|) of the
/// validation losses of one split; standard error sigma_hat / sqrt(f n) with
/// f the validation fraction. Throws insufficient-data for fewer than two
/// validation points.
InferenceResult holdout_inference(std::span<const double> validation_losses, std::size_t n,
                                  double holdout_fraction, double alpha);
/// Uses the split of the first fold of `run`.
ProcedureOutcome holdout_procedure(const CvRun& run, double holdout_fraction, double alpha);
/// Draws S of size floor(n (1 - f)) from Rng(spec.seed).
ProcedureOutcome holdout_procedure(const Dataset& data, const Comparison& cmp,
                                   const BaselineSpec& spec, double alpha);

/// Dietterich's cross-validated t: t with k-1 degrees of freedom on the k fold
/// means. Throws insufficient-folds for k < 2.
InferenceResult cv_ttest_inference(std::span<const double> fold_means, double r_hat,
                                   std::size_t n, double alpha);
ProcedureOutcome cv_ttest_procedure(const CvRun& run, double alpha);
/// Runs `spec.repetitions`-fold CV on a partition shuffled with spec.seed.
ProcedureOutcome cv_ttest_procedure(const Dataset& data, const Comparison& cmp,
                                    const BaselineSpec& spec, double alpha);

/// `repetitions` independent train/validation splits, each training on a
/// uniformly drawn subset of size floor(n (1 - fraction)).
std::vector<Fold> random_splits(std::size_t n, std::size_t repetitions, double fraction,
                                std::uint64_t seed);

/// t with r-1 degrees of freedom on the split means. The corrected variant
/// multiplies the sample variance by r (1/r + f/(1-f)). Throws
/// insufficient-repetitions for r < 2.
InferenceResult repeated_tv_inference(std::span<const double> split_means, std::size_t n,
                                      double holdout_fraction, bool corrected, double alpha);
ProcedureOutcome repeated_tv_from_fits(std::span<const std::shared_ptr<const SplitFit>> fits,
                                       std::size_t n, double holdout_fraction, bool corrected,
                                       double alpha);
ProcedureOutcome repeated_tv_procedure(const Dataset& data, const Comparison& cmp,
                                       const BaselineSpec& spec, double alpha, bool corrected);

/// Splits of the 5x2 test: for replicate j a random halving (A_j, B_j) with
/// |A_j| = ceil(n/2); split 2j trains on B_j and validates A_j, split 2j+1
/// trains on A_j and validates B_j.
std::vector<Fold> five_by_two_splits(std::size_t n, std::size_t replicates, std::uint64_t seed);

/// first[j], second[j] are the two half means of replicate j. The point
/// estimate is first[0] alone and the interval carries no 1/sqrt(n) factor.
InferenceResult five_by_two_inference(std::span<const double> first,
                                      std::span<const double> second, std::size_t n,
                                      double alpha);
ProcedureOutcome five_by_two_from_fits(std::span<const std::shared_ptr<const SplitFit>> fits,
                                       std::size_t n, double alpha);
ProcedureOutcome five_by_two_procedure(const Dataset& data, const Comparison& cmp,
                                       const BaselineSpec& spec, double alpha);

ProcedureOutcome run_baseline(const Dataset& data, const Comparison& cmp,
                              const BaselineSpec& spec, double alpha);

std::string to_string(BaselineKind kind);
BaselineKind baseline_kind_from_string(const std::string& name);

}  // namespace cvinfer
