#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "dictminimax/rng.hpp"

using dictminimax::GeneratorSeed;
using dictminimax::Rng;

TEST_CASE("equal seeds reproduce the sequence") {
  Rng a(GeneratorSeed{42, 7});
  Rng b(GeneratorSeed{42, 7});
  for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next_u64());
  CHECK(Rng(1, 2).key() != Rng(1, 3).key());
  CHECK(Rng(1, 2).key() != Rng(2, 2).key());
}

TEST_CASE("split is pure and yields distinct streams") {
  Rng parent(GeneratorSeed{9, 0});
  const auto before = parent.draws();
  const Rng c0 = parent.split(0);
  const Rng c0_again = parent.split(0);
  CHECK(parent.draws() == before);
  CHECK(c0.key() == c0_again.key());

  std::set<std::uint64_t> keys{parent.key()};
  for (std::uint64_t child = 0; child < 1000; ++child) keys.insert(parent.split(child).key());
  CHECK(keys.size() == 1001);

  // Splitting does not depend on how far the parent has advanced.
  Rng advanced(GeneratorSeed{9, 0});
  for (int i = 0; i < 17; ++i) (void)advanced.next_u64();
  CHECK(advanced.split(3).key() == parent.split(3).key());
}

TEST_CASE("fixed draw counts") {
  Rng rng(GeneratorSeed{1, 1});
  (void)rng.uniform();
  CHECK(rng.draws() == 1);
  (void)rng.below(10);
  CHECK(rng.draws() == 2);
  (void)rng.normal();
  CHECK(rng.draws() == 4);
}

TEST_CASE("uniform, below and normal have the right distributions") {
  Rng rng(GeneratorSeed{123, 0});
  constexpr int n = 200000;
  double sum = 0.0;
  double sum_sq = 0.0;
  std::vector<int> buckets(7, 0);
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    const auto k = rng.below(7);
    REQUIRE(k < 7);
    ++buckets[k];
    const double z = rng.normal();
    REQUIRE(std::isfinite(z));
    sum += z;
    sum_sq += z * z;
  }
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  CHECK(std::abs(mean) < 5.0 / std::sqrt(static_cast<double>(n)));
  // Var of the sample variance of a standard normal is about 2/n.
  CHECK(std::abs(var - 1.0) < 5.0 * std::sqrt(2.0 / n));

  double chi2 = 0.0;
  const double expected = n / 7.0;
  for (const int count : buckets) chi2 += (count - expected) * (count - expected) / expected;
  // 6 degrees of freedom; the 0.999 quantile is 22.46.
  CHECK(chi2 < 22.46);
}

TEST_CASE("below handles the extremes") {
  Rng rng(GeneratorSeed{0, 0});
  for (int i = 0; i < 100; ++i) CHECK(rng.below(1) == 0);
}
