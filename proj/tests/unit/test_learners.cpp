#include <doctest.h>

#include <cmath>
#include <vector>

#include "common.hpp"
#include "cvinfer/learners.hpp"
#include "cvinfer/random.hpp"

using namespace cvinfer;

namespace {

Dataset one_feature(std::vector<double> x, std::vector<double> y) {
  return Dataset(std::move(x), std::move(y), 1);
}

}  // namespace

TEST_CASE("sample mean of 1, 2, 3") {
  const Dataset d({}, {1.0, 2.0, 3.0}, 0);
  const auto rule = fit(AlgorithmSpec::sample_mean(), d);
  CHECK(rule.constant_prediction().value() == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(rule.predict({}) == doctest::Approx(2.0));
}

TEST_CASE("ridge limits") {
  Rng rng(5);
  std::vector<double> x, y;
  for (int i = 0; i < 30; ++i) {
    const double a = rng.normal(), b = rng.normal();
    x.insert(x.end(), {a, b});
    y.push_back(a - 2.0 * b + rng.normal());
  }
  const Dataset d(x, y, 2);
  const auto heavy = fit(AlgorithmSpec::ridge(1e12, true), d);
  for (double w : heavy.weights()) CHECK(std::abs(w) < 1e-6);

  const auto exact = fit(AlgorithmSpec::ridge(0.0), one_feature({1, 2, 3}, {2, 4, 6}));
  CHECK(std::abs(exact.weights()[0] - 2.0) < 1e-12);
  CHECK(exact.predict(std::vector<double>{10.0}) == doctest::Approx(20.0));

  CHECK(error_code_of([] { fit(AlgorithmSpec::ridge(0.0), one_feature({0, 0}, {1, 2})); }) ==
        ErrorCode::singular_system);
}

TEST_CASE("standardized ridge reports an affine form in raw units") {
  const Dataset d({1, 5, 2, 3, 8, 1, 4, 4}, {1, 2, 3, 4}, 2);
  const auto rule = fit(AlgorithmSpec::ridge(0.5, true), d);
  const auto form = rule.affine_form().value();
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto f = d.features(i);
    const double direct = form.offset + form.coefficients[0] * f[0] + form.coefficients[1] * f[1];
    CHECK(rule.predict(f) == doctest::Approx(direct).epsilon(1e-12));
  }
}

TEST_CASE("leave-one-out ridge on two points by hand") {
  // x = (1, 1), y = (0, 2), lambda = 1. Dropping point 0 leaves w = 2/2 = 1, so
  // the held-out residual is 0 - 1; dropping point 1 leaves w = 0, residual 2.
  const auto m = ridge_loocv_losses(one_feature({1, 1}, {0, 2}), 1.0);
  CHECK(m.losses()[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(m.losses()[1] == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(m.k() == 2);
}

TEST_CASE("leave-one-out ridge with dominant penalty tends to y squared") {
  const auto d = one_feature({0.3, -1.2, 2.0, 0.7}, {1.5, -0.5, 2.5, 0.1});
  const auto m = ridge_loocv_losses(d, 1e12);
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(std::abs(m.losses()[i] - d.target(i) * d.target(i)) < 1e-6);
  }
}

TEST_CASE("leave-one-out ridge errors") {
  CHECK(error_code_of([] { ridge_loocv_losses(one_feature({1, 0}, {1, 2}), 0.0); }) ==
        ErrorCode::leverage_singularity);
  CHECK(error_code_of([] { ridge_loocv_losses(one_feature({1}, {1}), 1.0); }) ==
        ErrorCode::insufficient_data);
}

TEST_CASE("logistic gradient matches central differences") {
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t p = 1 + rng.below(4), n = 5 + rng.below(20);
    std::vector<double> x, y;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < p; ++c) x.push_back(rng.normal());
      y.push_back(rng.bernoulli(0.5) ? 1.0 : 0.0);
    }
    const Dataset d(x, y, p, TargetKind::classification);
    std::vector<std::size_t> rows(n);
    for (std::size_t i = 0; i < n; ++i) rows[i] = i;
    const LogisticObjective obj{&d, rows, 0.5 + rng.uniform(), trial % 2 == 0};
    std::vector<double> params(p + (obj.intercept ? 1 : 0));
    for (auto& v : params) v = rng.normal();
    const auto g = obj.gradient(params);
    REQUIRE(g.size() == params.size());
    for (std::size_t c = 0; c < params.size(); ++c) {
      const double h = 1e-6;
      auto up = params, down = params;
      up[c] += h;
      down[c] -= h;
      const double numeric = (obj.value(up) - obj.value(down)) / (2.0 * h);
      CHECK(std::abs(numeric - g[c]) <= 1e-5 * std::max(1.0, std::abs(g[c])));
    }
  }
}

TEST_CASE("logistic fit separates an easy problem") {
  std::vector<double> x, y;
  for (int i = 0; i < 40; ++i) {
    x.push_back(i < 20 ? -1.0 - 0.05 * i : 1.0 + 0.05 * i);
    y.push_back(i < 20 ? 0.0 : 1.0);
  }
  const Dataset d(x, y, 1, TargetKind::classification);
  const auto rule = fit(AlgorithmSpec::logistic(0.01), d);
  CHECK(rule.classifies());
  CHECK(rule.predict(std::vector<double>{-2.0}) < 0.5);
  CHECK(rule.predict(std::vector<double>{2.0}) > 0.5);
}

TEST_CASE("nearest neighbours average and break ties by index") {
  const auto d = one_feature({0.0, 2.0, 1.0, 5.0}, {10.0, 20.0, 30.0, 40.0});
  const auto one = fit(AlgorithmSpec::knn(1), d);
  // 1.0 is equidistant from nothing but itself; 1.5 ties points 1 and 2 at 0.5
  CHECK(one.predict(std::vector<double>{1.0}) == 30.0);
  CHECK(one.predict(std::vector<double>{1.5}) == 20.0);
  const auto two = fit(AlgorithmSpec::knn(2), d);
  CHECK(two.predict(std::vector<double>{0.4}) == doctest::Approx(20.0));
  const auto all = fit(AlgorithmSpec::knn(10), d);
  CHECK(all.predict(std::vector<double>{0.0}) == doctest::Approx(25.0));
}

TEST_CASE("standardization uses training statistics only") {
  // rows 0 and 1 train; row 2 is far away and must not affect the scaling
  const Dataset d({0, 0, 10, 1, 1000, 50}, {1, 2, 3}, 2);
  const std::vector<std::size_t> train = {0, 1};
  const std::vector<double> query = {4.0, 1.0};
  CHECK(fit(AlgorithmSpec::knn(1), d, train).predict(query) == 1.0);
  const auto scaled = fit(AlgorithmSpec::knn(1, true), d, train);
  CHECK(scaled.predict(query) == 2.0);
  const Dataset only({0, 0, 10, 1}, {1, 2}, 2);
  const auto reference = fit(AlgorithmSpec::knn(1, true), only);
  Rng rng(2);
  for (int t = 0; t < 50; ++t) {
    const std::vector<double> q = {rng.uniform() * 12.0 - 1.0, rng.uniform() * 1.4 - 0.2};
    CHECK(scaled.predict(q) == reference.predict(q));
  }
  const auto ridge_a = fit(AlgorithmSpec::ridge(0.3, true), d, train);
  const auto ridge_b = fit(AlgorithmSpec::ridge(0.3, true), only);
  CHECK(ridge_a.predict(query) == doctest::Approx(ridge_b.predict(query)).epsilon(1e-14));
}

TEST_CASE("point losses") {
  const auto c = fit(AlgorithmSpec::constant_value(0.5), Dataset({}, {0.0}, 0));
  CHECK(point_loss(c, LossFunction::squared_error(), {{}, 1.0}) == doctest::Approx(0.25));
  CHECK(point_loss(c, LossFunction::zero_one(), {{}, 1.0}) == 0.0);
  CHECK(point_loss(c, LossFunction::zero_one(), {{}, 0.0}) == 1.0);
  CHECK(point_loss(c, LossFunction::excess_squared(1.0), {{}, 2.0}) == doctest::Approx(2.25 - 1.0));
  const auto mean = fit(AlgorithmSpec::sample_mean(), Dataset({}, {0.0, 1.0}, 0));
  CHECK(error_code_of([&] { point_loss(mean, LossFunction::zero_one(), {{}, 1.0}); }) ==
        ErrorCode::invalid_configuration);
}

TEST_CASE("algorithm and loss JSON round trip") {
  for (const auto& spec : {AlgorithmSpec::constant_value(2.5), AlgorithmSpec::sample_mean(),
                           AlgorithmSpec::ridge(3.0, true), AlgorithmSpec::knn(7),
                           AlgorithmSpec::logistic(0.2)}) {
    const auto back = algorithm_from_json(to_json(spec));
    CHECK(to_json(back) == to_json(spec));
    CHECK(back.kind == spec.kind);
  }
  const auto loss = loss_from_json(to_json(LossFunction::excess_squared(1.5)));
  CHECK(loss.type == LossType::excess_squared);
  CHECK(loss.anchor == 1.5);
  CHECK(loss_from_json("zero_one").type == LossType::zero_one);
  CHECK(error_code_of([] { algorithm_from_json({{"algo", "forest"}}); }) ==
        ErrorCode::invalid_configuration);
}
