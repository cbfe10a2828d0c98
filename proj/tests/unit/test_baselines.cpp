#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "common.hpp"
#include "cvinfer/baselines.hpp"
#include "cvinfer/quantiles.hpp"

using namespace cvinfer;

namespace {

Dataset linear_data(std::size_t n, std::uint64_t seed) {
  LinearGaussian task({1.0, 0.5}, 1.0);
  Rng rng(seed);
  return task.sample(n, rng);
}

}  // namespace

TEST_CASE("hold-out formulas") {
  const std::vector<double> two = {0.0, 1.0};
  const auto r = holdout_inference(two, 20, 0.1, 0.05);
  CHECK(r.sigma_hat * r.sigma_hat == doctest::Approx(0.25));
  CHECK(r.r_hat == doctest::Approx(0.5));

  std::vector<double> losses;
  for (int i = 0; i < 30; ++i) losses.push_back(std::sin(i) + 2.0);
  const auto w = holdout_inference(losses, 300, 0.1, 0.05);
  double m = 0.0, v = 0.0;
  for (double h : losses) m += h / 30.0;
  for (double h : losses) v += (h - m) * (h - m) / 30.0;
  CHECK(w.ci_high - w.ci_low ==
        doctest::Approx(2.0 * 1.959963984540054 * std::sqrt(v) * std::sqrt(10.0) / std::sqrt(300.0))
            .epsilon(1e-10));

  const std::vector<double> flat = {0.4, 0.4, 0.4};
  CHECK(holdout_inference(flat, 30, 0.1, 0.05).degenerate);
  const std::vector<double> one = {0.4};
  CHECK(error_code_of([&] { holdout_inference(one, 10, 0.1, 0.05); }) == ErrorCode::insufficient_data);
}

TEST_CASE("cross-validated t on fold means 1..10") {
  const std::vector<double> means = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  const auto r = cv_ttest_inference(means, 5.5, 100, 0.05);
  CHECK(r.r_hat == 5.5);
  CHECK(r.sigma_hat * r.sigma_hat == doctest::Approx(55.0 / 6.0));
  CHECK(r.df.value() == 9.0);
  const double half = t_quantile(0.975, 9) * std::sqrt(55.0 / 6.0) / std::sqrt(10.0);
  CHECK(r.ci_high == doctest::Approx(5.5 + half));
  CHECK(r.one_sided_upper == doctest::Approx(5.5 - t_quantile(0.05, 9) * std::sqrt(55.0 / 6.0) / std::sqrt(10.0)));

  const std::vector<double> same = {0.2, 0.2, 0.2};
  const auto z = cv_ttest_inference(same, 0.2, 30, 0.05);
  CHECK(z.ci_low == z.ci_high);
  const std::vector<double> single = {0.2};
  CHECK(error_code_of([&] { cv_ttest_inference(single, 0.2, 30, 0.05); }) ==
        ErrorCode::insufficient_folds);
}

TEST_CASE("corrected repeated train-validation is wider by the expected factor") {
  const std::vector<double> means = {0.3, 0.1, 0.25, 0.4, 0.2, 0.35, 0.15, 0.3, 0.22, 0.28};
  const auto plain = repeated_tv_inference(means, 200, 0.1, false, 0.05);
  const auto corrected = repeated_tv_inference(means, 200, 0.1, true, 0.05);
  CHECK((corrected.ci_high - corrected.ci_low) / (plain.ci_high - plain.ci_low) ==
        doctest::Approx(std::sqrt(10.0 * (0.1 + 0.1 / 0.9))).epsilon(1e-12));
  CHECK(std::abs(std::sqrt(10.0 * (0.1 + 0.1 / 0.9)) - 1.4530) < 1e-4);
  CHECK(plain.df.value() == 9.0);

  const std::vector<double> same(10, 0.5);
  CHECK(repeated_tv_inference(same, 200, 0.1, false, 0.05).degenerate);
  CHECK(repeated_tv_inference(same, 200, 0.1, true, 0.05).degenerate);
  const std::vector<double> single = {0.5};
  CHECK(error_code_of([&] { repeated_tv_inference(single, 200, 0.1, true, 0.05); }) ==
        ErrorCode::insufficient_repetitions);
}

TEST_CASE("random splits differ and have the requested sizes") {
  const auto splits = random_splits(40, 10, 0.1, 3);
  std::set<std::vector<std::size_t>> distinct;
  for (const auto& f : splits) {
    CHECK(f.train.size() == 36);
    CHECK(f.validation.size() == 4);
    distinct.insert(f.validation);
  }
  CHECK(distinct.size() > 1);
  const auto again = random_splits(40, 10, 0.1, 3);
  for (std::size_t s = 0; s < splits.size(); ++s) CHECK(again[s].validation == splits[s].validation);
}

TEST_CASE("five by two formulas") {
  const std::vector<double> first = {0.1, 0.3, 0.2, 0.25, 0.15};
  const std::vector<double> second = {0.2, 0.1, 0.2, 0.35, 0.05};
  const auto r = five_by_two_inference(first, second, 100, 0.05);
  double var = 0.0;
  for (std::size_t j = 0; j < 5; ++j) var += (first[j] - second[j]) * (first[j] - second[j]) / 2.0 / 5.0;
  CHECK(r.sigma_hat * r.sigma_hat == doctest::Approx(var).epsilon(1e-13));
  CHECK(r.r_hat == first[0]);
  CHECK(r.df.value() == 5.0);
  CHECK(r.ci_high == doctest::Approx(first[0] + t_quantile(0.975, 5) * std::sqrt(var)).epsilon(1e-12));

  const std::vector<double> equal(5, 0.3);
  CHECK(five_by_two_inference(equal, equal, 100, 0.05).degenerate);
}

TEST_CASE("five by two halves, including odd n") {
  const auto splits = five_by_two_splits(11, 5, 4);
  REQUIRE(splits.size() == 10);
  for (std::size_t j = 0; j < 5; ++j) {
    CHECK(splits[2 * j].validation.size() == 6);
    CHECK(splits[2 * j + 1].validation.size() == 5);
    CHECK(splits[2 * j].validation == splits[2 * j + 1].train);
    CHECK(splits[2 * j].train == splits[2 * j + 1].validation);
  }
  CHECK(error_code_of([] { five_by_two_splits(3, 5, 0); }) == ErrorCode::insufficient_data);
}

TEST_CASE("procedures on data record their targets and are seed deterministic") {
  const auto d = linear_data(60, 2);
  const Comparison cmp{AlgorithmSpec::ridge(1.0), AlgorithmSpec::knn(3), LossFunction::squared_error()};
  for (auto kind : {BaselineKind::holdout, BaselineKind::cv_ttest, BaselineKind::repeated_tv,
                    BaselineKind::corrected_repeated_tv, BaselineKind::five_by_two}) {
    const auto spec = BaselineSpec::defaults(kind, 12);
    const auto a = run_baseline(d, cmp, spec, 0.05);
    const auto b = run_baseline(d, cmp, spec, 0.05);
    CHECK(a.result.r_hat == b.result.r_hat);
    CHECK(a.result.ci_low == b.result.ci_low);
    CHECK_FALSE(a.result.target.empty());
    CHECK(a.splits.size() == a.target_weights.size());
    double total = 0.0;
    for (double w : a.target_weights) total += w;
    CHECK(total == doctest::Approx(1.0));
    CHECK(baseline_kind_from_string(to_string(kind)) == kind);
  }
  CHECK(BaselineSpec::defaults(BaselineKind::five_by_two).repetitions == 5);
}

TEST_CASE("hold-out on a CV run uses its first fold") {
  const auto d = linear_data(50, 3);
  const auto run = run_cv(d, make_partition(50, 5, 1, true), AlgorithmSpec::ridge(1.0),
                          LossFunction::squared_error());
  const auto h = holdout_procedure(run, 0.1, 0.05);
  CHECK(h.result.r_hat == doctest::Approx(run.fold_means[0]));
  const auto c = clt_procedure(run, Estimator::out, 0.05);
  CHECK(c.result.r_hat == doctest::Approx(run.r_hat));
  CHECK(c.splits.size() == 5);
}
