#include <doctest.h>

#include <cmath>

#include "common.hpp"
#include "cvinfer/quantiles.hpp"
#include "cvinfer/simulation.hpp"

using namespace cvinfer;

namespace {

ExperimentPlan location_plan(ExperimentMode mode) {
  ExperimentPlan plan;
  plan.task = {{"kind", "gaussian_location"}, {"mean", 0.0}, {"variance", 1.0}};
  plan.comparison = Comparison{AlgorithmSpec::sample_mean(), std::nullopt,
                               LossFunction::excess_squared(1.0)};
  plan.procedures = {ProcedureSpec{}};
  plan.sample_sizes = {100};
  plan.replications = 100;
  plan.k = 5;
  plan.seed = 42;
  plan.mode = mode;
  return plan;
}

ProcedureSpec custom(std::string label, CustomProcedure fn) {
  ProcedureSpec p;
  p.kind = "custom";
  p.label = std::move(label);
  p.custom = std::move(fn);
  return p;
}

double exact_target(const ReplicationContext& ctx) {
  return true_risk_oracle(ctx.cv, ctx.task, ctx.comparison.loss, 0, 0).value;
}

}  // namespace

TEST_CASE("Wilson intervals") {
  const auto none = wilson_interval(0, 10);
  CHECK(none.low == 0.0);
  CHECK(std::abs(none.high - 0.2775) < 1e-4);
  const auto half = wilson_interval(5, 10);
  CHECK(std::abs(half.low - 0.2366) < 1e-4);
  CHECK(std::abs(half.high - 0.7634) < 1e-4);
  CHECK(half.low + half.high == doctest::Approx(1.0));
  CHECK(wilson_interval(10, 10).high == 1.0);
  CHECK(error_code_of([] { wilson_interval(0, 0); }) == ErrorCode::invalid_input);
  CHECK(error_code_of([] { wilson_interval(3, 2); }) == ErrorCode::invalid_input);
  for (std::size_t t = 1; t < 40; ++t) {
    for (std::size_t s = 0; s <= t; ++s) {
      const auto w = wilson_interval(s, t);
      const double p = double(s) / double(t);
      CHECK(w.low <= p);
      CHECK(p <= w.high);
      CHECK(w.low >= 0.0);
      CHECK(w.high <= 1.0);
    }
  }
}

TEST_CASE("coverage of test doubles") {
  auto plan = location_plan(ExperimentMode::ci_coverage);
  plan.replications = 500;
  const double q = normal_quantile(0.975);
  plan.procedures = {
      custom("oracle",
             [q](const ReplicationContext& ctx) {
               // exact 95% interval: the target plus unit normal noise
               Rng rng(ctx.seed);
               const double target = exact_target(ctx);
               InferenceResult r;
               r.r_hat = target + rng.normal();
               r.ci_low = r.r_hat - q;
               r.ci_high = r.r_hat + q;
               return ScoredResult{r, target};
             }),
      custom("always_miss", [](const ReplicationContext& ctx) {
        const double target = exact_target(ctx);
        InferenceResult r;
        r.r_hat = r.ci_low = r.ci_high = target + 1.0;
        return ScoredResult{r, target};
      })};
  const auto res = run_experiment(plan);
  const auto& oracle = res.at("oracle", 100);
  CHECK(oracle.coverage->interval.low <= 0.95);
  CHECK(0.95 <= oracle.coverage->interval.high);
  const auto& miss = res.at("always_miss", 100);
  CHECK(miss.coverage->successes == 0);
  CHECK(miss.mean_width == 0.0);
}

TEST_CASE("identical algorithms never reject and small classes are suppressed") {
  auto plan = location_plan(ExperimentMode::test_size_power);
  plan.comparison = Comparison{AlgorithmSpec::sample_mean(), AlgorithmSpec::sample_mean(),
                               LossFunction::squared_error()};
  plan.replications = 20;
  const auto res = run_experiment(plan);
  const auto& p = res.at("clt_out", 100);
  CHECK(p.h0_count == 20);
  CHECK(p.h0_count + p.h1_count == p.replications);
  CHECK(p.rejection->successes == 0);
  CHECK_FALSE(p.size.has_value());
  CHECK_FALSE(p.power.has_value());

  plan.replications = 30;
  const auto more = run_experiment(plan);
  CHECK(more.at("clt_out", 100).size.has_value());
  CHECK(more.at("clt_out", 100).size->rate <= 0.05);
}

TEST_CASE("a dominating algorithm is detected") {
  auto plan = location_plan(ExperimentMode::test_size_power);
  plan.comparison = Comparison{AlgorithmSpec::sample_mean(), AlgorithmSpec::constant_value(1.0),
                               LossFunction::squared_error()};
  plan.sample_sizes = {400};
  plan.replications = 50;
  plan.both_directions = true;
  const auto res = run_experiment(plan);
  const auto& fwd = res.at("clt_out", 400);
  CHECK(fwd.h1_count == 50);
  CHECK(fwd.power->rate == 1.0);
  const auto& rev = res.at("clt_out", 400, "reversed");
  CHECK(rev.h0_count == 50);
  CHECK(rev.size->rate == 0.0);
}

TEST_CASE("interval width shrinks like one over root n") {
  auto plan = location_plan(ExperimentMode::ci_coverage);
  plan.sample_sizes = {250, 500, 1000, 2000};
  plan.k = 10;
  plan.replications = 100;
  const auto res = run_experiment(plan);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto n : plan.sample_sizes) {
    const double x = std::log(double(n)), y = std::log(res.at("clt_out", n).mean_width);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double c = 4.0;
  const double slope = (c * sxy - sx * sy) / (c * sxx - sx * sx);
  CHECK(slope >= -0.6);
  CHECK(slope <= -0.4);
}

TEST_CASE("experiments are deterministic and independent of workers") {
  auto plan = location_plan(ExperimentMode::ci_coverage);
  plan.procedures = {procedure_from_json("clt_in"), procedure_from_json("clt_out"),
                     procedure_from_json("holdout"), procedure_from_json("cv_ttest"),
                     procedure_from_json("corrected_repeated_tv"),
                     procedure_from_json("five_by_two")};
  plan.replications = 30;
  const auto a = to_json(run_experiment(plan)).dump();
  plan.workers = 3;
  const auto b = to_json(run_experiment(plan)).dump();
  CHECK(a == b);
  const auto back = experiment_result_from_json(nlohmann::json::parse(a));
  CHECK(to_json(back).dump() == a);
  const auto csv = to_long_csv(back);
  CHECK(csv.rfind("procedure,n,metric,value,low,high\n", 0) == 0);
}

TEST_CASE("plan parsing and validation") {
  const auto j = nlohmann::json::parse(R"({
    "task": {"kind": "gaussian_location", "mean": 0, "variance": 1},
    "comparison": {"algo": {"algo": "sample_mean"}, "loss": "squared_error"},
    "procedures": ["clt_out", {"kind": "repeated_tv", "repetitions": 4}],
    "sample_sizes": [50, 100], "replications": 10, "seed": 3, "k": 5})");
  const auto plan = plan_from_json(j);
  CHECK(plan.procedures.size() == 2);
  CHECK(plan.procedures[1].repetitions == 4);
  CHECK(plan_from_json(to_json(plan)).sample_sizes == plan.sample_sizes);

  auto bad = j;
  bad["sample_sizes"] = {100, 50};
  CHECK(error_code_of([&] { plan_from_json(bad); }) == ErrorCode::invalid_configuration);
  bad = j;
  bad["procedures"] = {"clt_out", "clt_out"};
  CHECK(error_code_of([&] { plan_from_json(bad); }) == ErrorCode::invalid_configuration);
  bad = j;
  bad["mode"] = "test_size_power";
  CHECK(error_code_of([&] { plan_from_json(bad); }) == ErrorCode::invalid_configuration);
}
