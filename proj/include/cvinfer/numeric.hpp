#pragma once

#include <cstddef>
#include <span>

namespace cvinfer {

/// Pairwise (cascade) summation: error grows as O(log n) rather than O(n).
double pairwise_sum(std::span<const double> values) noexcept;

/// Kahan-Babuska (Neumaier) compensated summation.
class CompensatedSum {
 public:
  void add(double x) noexcept;
  double value() const noexcept { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

double mean(std::span<const double> values) noexcept;

/// Sample variance with denominator (size - 1); 0 for fewer than two values.
double sample_variance(std::span<const double> values) noexcept;

}  // namespace cvinfer
