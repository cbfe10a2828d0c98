#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "cvinfer/random.hpp"

using namespace cvinfer;

TEST_CASE("SplitMix64 test vector for seed 42") {
  Rng rng(42);
  CHECK(rng.next() == 0xBDD732262FEB6E95ULL);
  CHECK(rng.next() == 0x28EFE333B266F103ULL);
  CHECK(rng.next() == 0x47526757130F9F52ULL);
  CHECK(rng.next() == 0x581CE1FF0E4AE394ULL);
}

TEST_CASE("derived streams are deterministic and distinct") {
  CHECK(derive_seed(7, 1) == derive_seed(7, 1));
  CHECK(derive_seed(7, 1) != derive_seed(7, 2));
  CHECK(derive_seed(7, 1) != derive_seed(8, 1));
}

TEST_CASE("uniform, below and normal behave") {
  Rng rng(1);
  const int n = 100000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    const auto b = rng.below(7);
    REQUIRE(b < 7);
    const double z = rng.normal();
    sum += z;
    sq += z * z;
  }
  // mean within 5 SE of 0, variance within 5 SE of 1 (SE of variance sqrt(2/n))
  CHECK(std::abs(sum / n) < 5.0 / std::sqrt(n));
  CHECK(std::abs(sq / n - 1.0) < 5.0 * std::sqrt(2.0 / n));
}

TEST_CASE("shuffle is a permutation") {
  Rng rng(3);
  std::vector<int> v(50);
  std::iota(v.begin(), v.end(), 0);
  auto w = v;
  rng.shuffle(std::span<int>(w));
  CHECK(w != v);
  std::sort(w.begin(), w.end());
  CHECK(w == v);
}
