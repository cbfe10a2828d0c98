#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>

namespace cvinfer {

/// SplitMix64 output finalizer.
std::uint64_t mix64(std::uint64_t z) noexcept;

/// Seed of the independent stream `stream` under master seed `master`:
/// mix64(master ^ mix64(stream + 0x9E3779B97F4A7C15)).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept;

/// SplitMix64 generator. Every random quantity in the library is drawn through
/// this class so that partitions and simulations are reproducible from a seed
/// alone, independently of the C++ standard library implementation.
///
/// Test vector (seed 42), first four outputs:
///   0xBDD732262FEB6E95 0x28EFE333B266F103 0x47526757130F9F52 0x581CE1FF0E4AE394
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept;

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;

  /// Uniform integer in [0, bound), unbiased (rejection sampling).
  std::uint64_t below(std::uint64_t bound) noexcept;

  /// Standard normal via Box-Muller; consumes exactly two outputs.
  double normal() noexcept;

  /// Student t with integer degrees of freedom: normal / sqrt(chi2 / df).
  double student_t(int df) noexcept;

  bool bernoulli(double p) noexcept { return uniform() < p; }

  /// Fisher-Yates, walking from the back.
  template <typename T>
  void shuffle(std::span<T> values) noexcept {
    for (std::size_t i = values.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::uint64_t state_;
};

}  // namespace cvinfer
