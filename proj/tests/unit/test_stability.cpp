#include <doctest.h>

#include <cmath>

#include "common.hpp"
#include "cvinfer/stability.hpp"

using namespace cvinfer;

namespace {

StabilityOptions quick(std::uint64_t seed) {
  StabilityOptions o;
  o.replicates = 400;
  o.inner = 100;
  o.batches = 20;
  o.train_sets = 20;
  o.test_points = 100;
  o.outer_reps = 0;
  o.seed = seed;
  return o;
}

}  // namespace

TEST_CASE("training size") {
  CHECK(training_size(100, 10) == 90);
  CHECK(training_size(23, 4) == 17);
  CHECK(error_code_of([] { training_size(5, 1); }) == ErrorCode::invalid_fold_count);
}

TEST_CASE("a rule that ignores its training data is perfectly stable") {
  GaussianLocation task(0.5, 1.0);
  const Comparison cmp{AlgorithmSpec::constant_value(0.2), std::nullopt, LossFunction::squared_error()};
  const auto s = estimate_stabilities(task, cmp, 50, 5, quick(1));
  CHECK(s.gamma_ms.raw == 0.0);
  CHECK(s.gamma_loss.raw == 0.0);
  CHECK(s.gamma_4.raw == 0.0);
  const auto v = estimate_variance_params(task, cmp, 50, 5, quick(2));
  CHECK(v.cond_var_mean.raw == doctest::Approx(0.0).scale(1).epsilon(1e-12));
  CHECK(v.sigma2_tilde.raw == doctest::Approx(v.sigma2.raw).epsilon(1e-12));
  CHECK(v.sigma2.raw > 0.0);
}

TEST_CASE("sample mean with excess loss reproduces the closed forms") {
  // h(z, Z) = (z - mean)^2 - (z - a)^2 with z ~ N(0, v):
  //   hbar(z) = v/m + 2 a z - a^2, so sigma2 = 4 a^2 v
  //   a swap moves the mean by d = (Z_i' - Z_i)/m and changes h' by -2 z d,
  //   so gamma_loss = E[4 z^2 d^2] = 8 v^2 / m^2
  const double v = 2.0, a = 1.0;
  GaussianLocation task(0.0, v);
  const Comparison cmp{AlgorithmSpec::sample_mean(), std::nullopt, LossFunction::excess_squared(a)};
  for (auto [n, k] : {std::pair<std::size_t, std::size_t>{500, 10}, {500, 5}}) {
    const double m = static_cast<double>(training_size(n, k));
    auto o = quick(n + k);
    o.replicates = 2000;
    const auto s = estimate_stabilities(task, cmp, n, k, o);
    CHECK(std::abs(s.gamma_loss.raw - 8.0 * v * v / (m * m)) <= 3.0 * s.gamma_loss.standard_error);
    CHECK(s.gamma_loss.raw <= s.gamma_ms.raw + 2.0 * s.ms_minus_loss.standard_error);
    const auto p = estimate_variance_params(task, cmp, n, k, o);
    CHECK(std::abs(p.sigma2.raw - 4.0 * a * a * v) <= 3.0 * p.sigma2.standard_error);
    CHECK(p.sigma2.raw <= p.sigma2_tilde.raw + 3.0 * p.tilde_gap.standard_error);
  }
}

TEST_CASE("surrogate-mean task: gap between the two variances") {
  // h = (Y0 - mean(X))^2 with independent X, Y of mean 0: the gap is
  // E[Var(h | Z)] - Var(hbar) = 4 Var(X) Var(Y) / m
  SurrogateMeanTask task(0.0, 1.0, 0, 1.5);
  const Comparison cmp{AlgorithmSpec::surrogate_mean(), std::nullopt, LossFunction::squared_error()};
  const std::size_t n = 50, k = 5;
  const double m = static_cast<double>(training_size(n, k));
  auto o = quick(31);
  o.batches = 40;
  const auto p = estimate_variance_params(task, cmp, n, k, o);
  const double expected = 4.0 * task.feature_variance() * task.target_variance() / m;
  CHECK(std::abs(p.tilde_gap.raw - expected) <= 3.0 * p.tilde_gap.standard_error);
}

TEST_CASE("diagnostic on an identically zero difference is undefined") {
  GaussianLocation task(0.0, 1.0);
  const Comparison cmp{AlgorithmSpec::sample_mean(), AlgorithmSpec::sample_mean(),
                       LossFunction::squared_error()};
  auto o = quick(5);
  o.outer_reps = 20;
  CHECK(error_code_of([&] { variance_ratio_diagnostic(task, cmp, 40, 4, o); }) ==
        ErrorCode::degenerate_diagnostic);
}

TEST_CASE("small Monte Carlo sizes warn, exhaustive mode is bounded") {
  GaussianLocation task(0.0, 1.0);
  const Comparison cmp{AlgorithmSpec::sample_mean(), std::nullopt, LossFunction::squared_error()};
  auto o = quick(6);
  o.replicates = 50;
  o.inner = 20;
  const auto s = estimate_stabilities(task, cmp, 40, 4, o);
  CHECK(s.warnings.size() == 2);
  o.exhaustive = true;
  CHECK(error_code_of([&] { estimate_stabilities(task, cmp, 100, 4, o); }) ==
        ErrorCode::invalid_configuration);
  const auto ex = estimate_stabilities(task, cmp, 40, 4, o);
  CHECK(ex.gamma_ms.value > 0.0);
}

TEST_CASE("results do not depend on the worker count") {
  GaussianLocation task(0.0, 1.0);
  const Comparison cmp{AlgorithmSpec::sample_mean(), std::nullopt, LossFunction::squared_error()};
  auto o = quick(7);
  o.outer_reps = 100;
  const auto a = stability_report(task, cmp, 60, 5, o);
  o.workers = 4;
  const auto b = stability_report(task, cmp, 60, 5, o);
  CHECK(to_json(a) == to_json(b));
  const auto back = stability_report_from_json(to_json(a));
  CHECK(to_json(back) == to_json(a));
  CHECK(a.variance_ratio.has_value());
}
