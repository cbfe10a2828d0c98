#include "cvinfer/data.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cvinfer/error.hpp"
#include "cvinfer/random.hpp"

namespace cvinfer {

Dataset::Dataset(std::vector<double> features, std::vector<double> targets, std::size_t dim,
                 TargetKind kind)
    : dim_(dim), kind_(kind) {
  if (features.size() != targets.size() * dim) {
    throw Error(ErrorCode::invalid_input, "feature buffer has " +
                                              std::to_string(features.size()) +
                                              " values, expected " +
                                              std::to_string(targets.size() * dim));
  }
  for (std::size_t i = 0; i < targets.size(); ++i) {
    check_row({features.data() + i * dim, dim}, targets[i]);
  }
  features_ = std::move(features);
  targets_ = std::move(targets);
}

void Dataset::push_back(std::span<const double> features, double target) {
  if (features.size() != dim_) {
    throw Error(ErrorCode::invalid_input, "row has " + std::to_string(features.size()) +
                                              " features, dataset has " + std::to_string(dim_));
  }
  check_row(features, target);
  features_.insert(features_.end(), features.begin(), features.end());
  targets_.push_back(target);
}

void Dataset::check_row(std::span<const double> features, double target) const {
  for (double x : features) {
    if (!std::isfinite(x)) throw Error(ErrorCode::invalid_input, "non-finite feature value");
  }
  if (!std::isfinite(target)) throw Error(ErrorCode::invalid_input, "non-finite target value");
  if (kind_ == TargetKind::classification && target != 0.0 && target != 1.0) {
    throw Error(ErrorCode::invalid_input, "classification target must be 0 or 1");
  }
}

FoldPartition::FoldPartition(std::span<const std::size_t> fold_of, std::size_t k)
    : fold_of_(fold_of.begin(), fold_of.end()), folds_(k) {
  const std::size_t n = fold_of_.size();
  if (k < 2 || k > n) {
    throw Error(ErrorCode::invalid_fold_count,
                "fold count " + std::to_string(k) + " outside [2, " + std::to_string(n) + "]");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (fold_of_[i] >= k) {
      throw Error(ErrorCode::invalid_fold_count, "fold label out of range at index " +
                                                     std::to_string(i));
    }
    folds_[fold_of_[i]].validation.push_back(i);
  }
  for (std::size_t j = 0; j < k; ++j) {
    auto& fold = folds_[j];
    if (fold.validation.empty()) {
      throw Error(ErrorCode::invalid_fold_count, "fold " + std::to_string(j) + " is empty");
    }
    fold.train.reserve(n - fold.validation.size());
    for (std::size_t i = 0; i < n; ++i) {
      if (fold_of_[i] != j) fold.train.push_back(i);
    }
  }
}

std::vector<std::size_t> FoldPartition::fold_sizes() const {
  std::vector<std::size_t> sizes;
  sizes.reserve(folds_.size());
  for (const auto& f : folds_) sizes.push_back(f.validation.size());
  return sizes;
}

FoldPartition make_partition(std::size_t n, std::size_t k, std::uint64_t seed, bool shuffle) {
  if (k < 2 || k > n) {
    throw Error(ErrorCode::invalid_fold_count,
                "fold count " + std::to_string(k) + " outside [2, " + std::to_string(n) + "]");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (shuffle) {
    Rng rng(seed);
    rng.shuffle(std::span<std::size_t>(order));
  }

  std::vector<std::size_t> fold_of(n);
  const std::size_t base = n / k;
  const std::size_t extra = n % k;
  std::size_t pos = 0;
  for (std::size_t j = 0; j < k; ++j) {
    const std::size_t size = base + (j < extra ? 1 : 0);
    for (std::size_t s = 0; s < size; ++s) fold_of[order[pos++]] = j;
  }
  return FoldPartition(fold_of, k);
}

bool validate_loss_matrix(std::span<const LossEntry> entries, std::size_t n, std::size_t k) {
  if (k < 1) throw Error(ErrorCode::malformed_loss_matrix, "loss matrix needs at least one fold");
  if (entries.size() != n) {
    throw Error(ErrorCode::malformed_loss_matrix, "expected " + std::to_string(n) +
                                                      " entries, found " +
                                                      std::to_string(entries.size()));
  }
  std::vector<char> seen(n, 0);
  std::vector<std::size_t> fold_count(k, 0);
  bool binary = true;
  for (const auto& e : entries) {
    if (e.index >= n) {
      throw Error(ErrorCode::malformed_loss_matrix,
                  "point index " + std::to_string(e.index) + " out of range");
    }
    if (seen[e.index]) {
      throw Error(ErrorCode::malformed_loss_matrix,
                  "duplicate point index " + std::to_string(e.index));
    }
    seen[e.index] = 1;
    if (e.fold >= k) {
      throw Error(ErrorCode::malformed_loss_matrix,
                  "fold id " + std::to_string(e.fold) + " out of range");
    }
    ++fold_count[e.fold];
    if (!std::isfinite(e.loss)) {
      throw Error(ErrorCode::malformed_loss_matrix,
                  "non-finite loss at index " + std::to_string(e.index));
    }
    binary = binary && (e.loss == 0.0 || e.loss == 1.0);
  }
  for (std::size_t j = 0; j < k; ++j) {
    if (fold_count[j] == 0) {
      throw Error(ErrorCode::malformed_loss_matrix, "fold " + std::to_string(j) + " is empty");
    }
  }
  return binary;
}

LossMatrix::LossMatrix(std::vector<LossEntry> entries, std::size_t n, std::size_t k,
                       LossKind kind)
    : entries_(std::move(entries)), kind_(kind) {
  binary_ = validate_loss_matrix(entries_, n, k);
  std::sort(entries_.begin(), entries_.end(),
            [](const LossEntry& a, const LossEntry& b) { return a.index < b.index; });
  losses_.reserve(n);
  by_fold_.resize(k);
  for (const auto& e : entries_) {
    losses_.push_back(e.loss);
    by_fold_[e.fold].push_back(e.loss);
  }
}

std::vector<std::size_t> LossMatrix::fold_sizes() const {
  std::vector<std::size_t> sizes;
  sizes.reserve(by_fold_.size());
  for (const auto& f : by_fold_) sizes.push_back(f.size());
  return sizes;
}

bool LossMatrix::even_folds() const noexcept {
  return std::all_of(by_fold_.begin(), by_fold_.end(),
                     [&](const auto& f) { return f.size() == by_fold_.front().size(); });
}

LossMatrix LossMatrix::with_kind(LossKind kind) const {
  return LossMatrix(entries_, n(), k(), kind);
}

LossMatrix LossMatrix::negated() const {
  auto entries = entries_;
  for (auto& e : entries) e.loss = -e.loss;
  return LossMatrix(std::move(entries), n(), k(), kind_);
}

}  // namespace cvinfer
