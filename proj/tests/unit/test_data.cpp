#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "cvinfer/data.hpp"
#include "common.hpp"
#include "cvinfer/random.hpp"

using namespace cvinfer;

TEST_CASE("contiguous partition of 4 points into 2 folds") {
  const auto p = make_partition(4, 2, 0, false);
  CHECK(p[0].validation == std::vector<std::size_t>{0, 1});
  CHECK(p[1].validation == std::vector<std::size_t>{2, 3});
  CHECK(p[0].train == std::vector<std::size_t>{2, 3});
  CHECK(p[1].train == std::vector<std::size_t>{0, 1});
}

TEST_CASE("remainder rule and LOOCV") {
  CHECK(make_partition(5, 2, 0, false).fold_sizes() == std::vector<std::size_t>{3, 2});
  const auto loo = make_partition(6, 6, 0, false);
  for (std::size_t j = 0; j < 6; ++j) {
    CHECK(loo[j].validation == std::vector<std::size_t>{j});
    CHECK(loo[j].train.size() == 5);
  }
}

TEST_CASE("invalid fold counts") {
  CHECK(error_code_of([] { make_partition(5, 1, 0, false); }) == ErrorCode::invalid_fold_count);
  CHECK(error_code_of([] { make_partition(5, 6, 0, false); }) == ErrorCode::invalid_fold_count);
}

TEST_CASE("partition is a bijection for random n, k") {
  Rng rng(9);
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 2 + rng.below(200);
    const std::size_t k = 2 + rng.below(n - 1);
    const auto p = make_partition(n, k, rng.next(), t % 2 == 0);
    std::vector<std::size_t> all;
    for (const auto& f : p.folds()) {
      all.insert(all.end(), f.validation.begin(), f.validation.end());
      CHECK(std::is_sorted(f.train.begin(), f.train.end()));
      CHECK(f.train.size() + f.validation.size() == n);
    }
    std::sort(all.begin(), all.end());
    for (std::size_t i = 0; i < n; ++i) REQUIRE(all[i] == i);
  }
}

TEST_CASE("seeded shuffles are reproducible and seed dependent") {
  const auto a = make_partition(30, 5, 11, true);
  const auto b = make_partition(30, 5, 11, true);
  const auto c = make_partition(30, 5, 12, true);
  CHECK(a.fold_of() == b.fold_of());
  CHECK(a.fold_of() != c.fold_of());
}

TEST_CASE("loss matrix validation") {
  std::vector<LossEntry> ok = {{0, 0, 0.0}, {1, 0, 1.0}, {2, 1, 1.0}, {3, 1, 0.0}};
  CHECK(validate_loss_matrix(ok, 4, 2));
  const LossMatrix m(ok, 4, 2);
  CHECK(m.binary());
  CHECK(m.by_fold()[1] == std::vector<double>{1.0, 0.0});

  auto dup = ok;
  dup[1].index = 3;
  CHECK(error_code_of([&] { validate_loss_matrix(dup, 4, 2); }) == ErrorCode::malformed_loss_matrix);
  auto missing = ok;
  missing.pop_back();
  CHECK(error_code_of([&] { validate_loss_matrix(missing, 4, 2); }) == ErrorCode::malformed_loss_matrix);
  auto empty_fold = ok;
  for (auto& e : empty_fold) e.fold = 0;
  CHECK(error_code_of([&] { LossMatrix(empty_fold, 4, 2); }) == ErrorCode::malformed_loss_matrix);

  auto real = ok;
  real[0].loss = 0.5;
  CHECK_FALSE(LossMatrix(real, 4, 2).binary());
}

TEST_CASE("negation and kinds") {
  const LossMatrix m({{0, 0, 1.5}, {1, 1, -2.0}}, 2, 2, LossKind::difference);
  const auto neg = m.negated();
  CHECK(neg.losses() == std::vector<double>{-1.5, 2.0});
  CHECK(neg.kind() == LossKind::difference);
  CHECK(m.with_kind(LossKind::plain).kind() == LossKind::plain);
}

TEST_CASE("dataset invariants") {
  CHECK(error_code_of([] { Dataset({1.0, 2.0}, {0.0, 2.0}, 1, TargetKind::classification); }) ==
        ErrorCode::invalid_input);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CHECK(error_code_of([&] { Dataset({1.0, nan}, {0.0, 1.0}, 1); }) == ErrorCode::invalid_input);
  CHECK(error_code_of([] { Dataset({1.0, 2.0, 3.0}, {0.0, 1.0}, 2); }) == ErrorCode::invalid_input);
  Dataset d(2);
  const double row[] = {1.0, 2.0};
  d.push_back(row, 3.0);
  CHECK(d.size() == 1);
  CHECK(d.features(0)[1] == 2.0);
}
