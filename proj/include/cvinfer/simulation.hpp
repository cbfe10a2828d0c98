#pragma once

// Replication loops for coverage, width, size and power of the inference
// procedures on synthetic tasks. Every procedure is scored against its own
// test error, computed from the rules it actually fitted.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cvinfer/baselines.hpp"
#include "cvinfer/cv.hpp"
#include "cvinfer/estimators.hpp"
#include "cvinfer/generators.hpp"
#include "cvinfer/inference.hpp"

namespace cvinfer {

struct WilsonInterval {
  double low = 0.0;
  double high = 1.0;
};

/// Wilson score interval for a binomial proportion. The low end is exactly 0
/// when successes == 0 and the high end exactly 1 when successes == trials.
/// Throws invalid-input for trials == 0 or successes > trials.
WilsonInterval wilson_interval(std::size_t successes, std::size_t trials, double conf = 0.95);

enum class ExperimentMode { ci_coverage, test_size_power };

/// What a custom procedure sees in one replication.
struct ReplicationContext {
  const Dataset& data;
  const Generator& task;
  const Comparison& comparison;
  const CvRun& cv;
  std::size_t replication;
  double alpha;
  /// Private seed for the procedure's own randomness.
  std::uint64_t seed;
};

struct ScoredResult {
  InferenceResult result;
  /// The test error the interval or test is judged against.
  double target = 0.0;
};

using CustomProcedure = std::function<ScoredResult(const ReplicationContext&)>;

struct ProcedureSpec {
  /// clt, holdout, cv_ttest, repeated_tv, corrected_repeated_tv, five_by_two
  /// or custom.
  std::string kind = "clt";
  Estimator estimator = Estimator::out;
  /// Splits for repeated_tv (default 10) or replicates for five_by_two
  /// (default 5); 0 selects the default. cv_ttest always reuses the plan's
  /// k-fold run and hold-out its first fold.
  std::size_t repetitions = 0;
  double holdout_fraction = 0.1;
  /// Name in the results; defaults to the kind (clt_in / clt_out for clt).
  std::string label;
  CustomProcedure custom;

  std::string name() const;
};

/// "clt_in", "clt_out", a baseline kind, or an object with "kind" and options.
ProcedureSpec procedure_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ProcedureSpec& p);

struct ExperimentPlan {
  nlohmann::json task;
  Comparison comparison;
  std::vector<ProcedureSpec> procedures;
  std::vector<std::size_t> sample_sizes;
  std::size_t replications = 500;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  ExperimentMode mode = ExperimentMode::ci_coverage;
  std::size_t k = 10;
  /// Monte Carlo points per replication for targets without a closed form.
  std::size_t n_mc = 2000;
  std::size_t workers = 1;
  /// Test mode only: also run every procedure on the reversed comparison
  /// (negated losses, same fits), so one experiment measures size and power.
  bool both_directions = false;
  /// Confidence level of the reported Wilson intervals.
  double confidence = 0.95;
  /// Size or power points resting on fewer replications are suppressed.
  std::size_t min_class_size = 25;

  /// Throws invalid-configuration on an unusable plan.
  void validate() const;
};

ExperimentPlan plan_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentPlan& plan);

struct RateSummary {
  std::size_t successes = 0;
  std::size_t trials = 0;
  double rate = 0.0;
  WilsonInterval interval;
};

struct PointSummary {
  std::string procedure;
  std::string direction = "forward";
  std::size_t n = 0;
  std::size_t replications = 0;
  double mean_target = 0.0;
  // Coverage mode.
  std::optional<RateSummary> coverage;
  double mean_width = 0.0;
  double width_se = 0.0;
  // Test mode. h0_count + h1_count == replications.
  std::size_t h0_count = 0;
  std::size_t h1_count = 0;
  std::size_t inconclusive = 0;
  std::optional<RateSummary> rejection;
  std::optional<RateSummary> size;
  std::optional<RateSummary> power;
};

struct ExperimentResult {
  ExperimentMode mode = ExperimentMode::ci_coverage;
  std::vector<PointSummary> points;
  std::vector<std::string> warnings;

  const PointSummary& at(const std::string& procedure, std::size_t n,
                         const std::string& direction = "forward") const;
};

/// Runs the plan in its own mode. Results do not depend on plan.workers.
ExperimentResult run_experiment(const ExperimentPlan& plan);
ExperimentResult run_coverage_experiment(ExperimentPlan plan);
ExperimentResult run_test_experiment(ExperimentPlan plan);

nlohmann::json to_json(const ExperimentResult& r);
ExperimentResult experiment_result_from_json(const nlohmann::json& j);
/// Long format: procedure,n,metric,value,low,high.
std::string to_long_csv(const ExperimentResult& r);

std::string to_string(ExperimentMode mode);
ExperimentMode experiment_mode_from_string(const std::string& name);

}  // namespace cvinfer
