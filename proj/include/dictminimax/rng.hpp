#pragma once

#include <cstdint>
#include <limits>

namespace dictminimax {

struct GeneratorSeed {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_id = 0;
};

/// Counter-based generator: output k is a SplitMix64 finalizer applied to
/// key + k * golden. A stream is fully identified by its key, so children
/// derived with split() never share state with the parent or each other.
///
/// Draw counts are fixed per call: uniform() and below() consume one word,
/// normal() consumes exactly two.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(GeneratorSeed seed);
  Rng(std::uint64_t master_seed, std::uint64_t stream_id)
      : Rng(GeneratorSeed{master_seed, stream_id}) {}

  /// Independent child stream. Pure: does not advance this generator.
  [[nodiscard]] Rng split(std::uint64_t child) const;

  std::uint64_t next_u64();
  result_type operator()() { return next_u64(); }
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer on [0, n). Multiply-shift; bias is below n / 2^64.
  std::uint64_t below(std::uint64_t n);
  /// Standard normal via Box-Muller (cosine branch only).
  double normal();

  [[nodiscard]] std::uint64_t key() const { return key_; }
  [[nodiscard]] std::uint64_t draws() const { return counter_; }

 private:
  struct FromKey {};
  Rng(FromKey, std::uint64_t key) : key_(key) {}

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t z);

}  // namespace dictminimax
