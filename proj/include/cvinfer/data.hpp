#pragma once

// Datasets, fold partitions and per-point loss matrices.
//
// All indices are 0-based: a dataset of n points has index space {0, ..., n-1}
// and folds are numbered {0, ..., k-1}. The on-disk formats use the same base.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace cvinfer {

enum class TargetKind { regression, classification };

struct DataPoint {
  std::span<const double> features;
  double target;
};

/// Row-major feature storage with one target per row.
class Dataset {
 public:
  explicit Dataset(std::size_t dim, TargetKind kind = TargetKind::regression)
      : dim_(dim), kind_(kind) {}

  /// Throws invalid-input if the feature buffer is not `targets.size() * dim`
  /// long, a value is non-finite, or a classification target is not 0 or 1.
  Dataset(std::vector<double> features, std::vector<double> targets, std::size_t dim,
          TargetKind kind = TargetKind::regression);

  void push_back(std::span<const double> features, double target);

  std::size_t size() const noexcept { return targets_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  TargetKind kind() const noexcept { return kind_; }

  std::span<const double> features(std::size_t i) const noexcept {
    return {features_.data() + i * dim_, dim_};
  }
  double target(std::size_t i) const noexcept { return targets_[i]; }
  DataPoint operator[](std::size_t i) const noexcept { return {features(i), targets_[i]}; }

  const std::vector<double>& targets() const noexcept { return targets_; }
  const std::vector<double>& feature_buffer() const noexcept { return features_; }

 private:
  void check_row(std::span<const double> features, double target) const;

  std::size_t dim_;
  TargetKind kind_;
  std::vector<double> features_;
  std::vector<double> targets_;
};

/// One train/validation split. `train` is the complement of `validation`;
/// both are stored in ascending (dataset) order.
struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

class FoldPartition {
 public:
  /// Builds the partition whose fold j validates exactly the points labelled j.
  /// Throws invalid-fold-count for k < 2 or k > n and for empty folds.
  FoldPartition(std::span<const std::size_t> fold_of, std::size_t k);

  std::size_t n() const noexcept { return fold_of_.size(); }
  std::size_t k() const noexcept { return folds_.size(); }
  const Fold& operator[](std::size_t j) const noexcept { return folds_[j]; }
  const std::vector<Fold>& folds() const noexcept { return folds_; }
  const std::vector<std::size_t>& fold_of() const noexcept { return fold_of_; }
  std::vector<std::size_t> fold_sizes() const;

 private:
  std::vector<std::size_t> fold_of_;
  std::vector<Fold> folds_;
};

/// Splits {0..n-1} into k validation folds. The first (n mod k) folds hold
/// ceil(n/k) points, the rest floor(n/k). Without shuffling the folds are
/// contiguous runs of the dataset order; with shuffling the index sequence is
/// first permuted by Rng(seed) and then sliced the same way.
FoldPartition make_partition(std::size_t n, std::size_t k, std::uint64_t seed, bool shuffle);

enum class LossKind { plain, difference };

struct LossEntry {
  std::size_t index;
  std::size_t fold;
  double loss;
};

/// Checks that `entries` hold exactly one finite loss for each index in [0, n)
/// and that every fold in [0, k) is non-empty. Returns the binary flag (every
/// loss is exactly 0 or 1). Throws malformed-loss-matrix otherwise.
bool validate_loss_matrix(std::span<const LossEntry> entries, std::size_t n, std::size_t k);

/// Held-out losses of one cross-validation run, one entry per point.
class LossMatrix {
 public:
  LossMatrix(std::vector<LossEntry> entries, std::size_t n, std::size_t k,
             LossKind kind = LossKind::plain);

  std::size_t n() const noexcept { return losses_.size(); }
  std::size_t k() const noexcept { return by_fold_.size(); }
  LossKind kind() const noexcept { return kind_; }
  bool binary() const noexcept { return binary_; }

  /// Entries sorted by point index.
  const std::vector<LossEntry>& entries() const noexcept { return entries_; }
  /// losses()[i] is the loss of point i.
  const std::vector<double>& losses() const noexcept { return losses_; }
  /// Losses grouped by fold, each group in ascending point order.
  const std::vector<std::vector<double>>& by_fold() const noexcept { return by_fold_; }
  std::vector<std::size_t> fold_sizes() const;
  bool even_folds() const noexcept;

  LossMatrix with_kind(LossKind kind) const;
  /// Same folds, every loss multiplied by -1 (swaps the roles of two algorithms).
  LossMatrix negated() const;

 private:
  std::vector<LossEntry> entries_;
  std::vector<double> losses_;
  std::vector<std::vector<double>> by_fold_;
  LossKind kind_;
  bool binary_;
};

}  // namespace cvinfer
