#pragma once

// Variance estimators for the asymptotic variance of the cross-validation error.
//
//   within-fold  sigma2_in  = (1/k) sum_j 1/(n_j - 1) sum_{i in fold j} (h_i - mean_j)^2
//   all-pairs    sigma2_out = (1/n) sum_i (h_i - R_hat)^2
//
// With equal folds these are exactly the textbook forms; with unequal folds
// each fold's sample variance uses its own size n_j and folds are averaged with
// weight 1/k (reported through VarianceEstimate::uneven_folds).

#include <cstddef>
#include <string>

#include <json.hpp>

#include "cvinfer/data.hpp"

namespace cvinfer {

/// Which estimator a caller asks for.
enum class Estimator { within, out };

/// How a reported value was computed.
enum class EstimatorKind {
  within_fold,
  all_pairs,
  within_fold_binary,
  all_pairs_binary,
  brute_force_within,
  brute_force_all_pairs
};

struct VarianceEstimate {
  double value = 0.0;
  EstimatorKind kind = EstimatorKind::all_pairs;
  std::size_t k = 0;
  std::size_t n = 0;
  bool uneven_folds = false;
};

/// Overall cross-validation error R_hat = (1/n) sum_i h_i.
double cv_error(const LossMatrix& m);

/// Throws within-fold-undefined when some fold holds a single point (LOOCV).
/// Binary matrices use (1/k) sum_j n_j/(n_j-1) p_j (1 - p_j) unless
/// `binary_shortcut` is false.
VarianceEstimate sigma_in(const LossMatrix& m, bool binary_shortcut = true);

/// Throws inconsistent-inputs when r_hat differs from the matrix mean by more
/// than 1e-12 (relative to max(1, |r_hat|)). Binary matrices use
/// R_hat (1 - R_hat) unless `binary_shortcut` is false.
VarianceEstimate sigma_out(const LossMatrix& m, double r_hat, bool binary_shortcut = true);
VarianceEstimate sigma_out(const LossMatrix& m, bool binary_shortcut = true);

VarianceEstimate estimate_variance(const LossMatrix& m, Estimator which);

/// Literal evaluation of the displayed double sums with compensated summation
/// and no algebraic shortcuts (each fold mean is recomputed for every term).
/// Quadratic in the fold size; meant as a test oracle.
VarianceEstimate brute_force_reference(const LossMatrix& m, Estimator which);

std::string to_string(EstimatorKind kind);
std::string to_string(Estimator which);
Estimator estimator_from_string(const std::string& name);

nlohmann::json to_json(const VarianceEstimate& v);
VarianceEstimate variance_estimate_from_json(const nlohmann::json& j);

}  // namespace cvinfer
