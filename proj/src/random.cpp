#include "cvinfer/random.hpp"

#include <cmath>
#include <numbers>

namespace cvinfer {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept {
  return mix64(master ^ mix64(stream + kGolden));
}

std::uint64_t Rng::next() noexcept {
  state_ += kGolden;
  return mix64(state_);
}

double Rng::uniform() noexcept {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::below(std::uint64_t bound) noexcept {
  if (bound <= 1) return 0;
  // Reject the top partial bucket so every residue is equally likely.
  const std::uint64_t limit = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = next();
    if (r >= limit) return r % bound;
  }
}

double Rng::normal() noexcept {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::student_t(int df) noexcept {
  const double z = normal();
  double chi2 = 0.0;
  for (int i = 0; i < df; ++i) {
    const double g = normal();
    chi2 += g * g;
  }
  return z / std::sqrt(chi2 / df);
}

}  // namespace cvinfer
