#include "cvinfer/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace cvinfer {

double pairwise_sum(std::span<const double> values) noexcept {
  constexpr std::size_t kBlock = 16;
  if (values.size() <= kBlock) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

void CompensatedSum::add(double x) noexcept {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    compensation_ += (sum_ - t) + x;
  } else {
    compensation_ += (x - t) + sum_;
  }
  sum_ = t;
}

double mean(std::span<const double> values) noexcept {
  if (values.empty()) return 0.0;
  // constant input must give its value back exactly so that spreads vanish
  if (std::all_of(values.begin(), values.end(), [&](double v) { return v == values[0]; })) {
    return values[0];
  }
  return pairwise_sum(values) / static_cast<double>(values.size());
}

double sample_variance(std::span<const double> values) noexcept {
  if (values.size() < 2) return 0.0;
  const double m = mean(values);
  std::vector<double> sq(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double d = values[i] - m;
    sq[i] = d * d;
  }
  return pairwise_sum(sq) / static_cast<double>(values.size() - 1);
}

}  // namespace cvinfer
