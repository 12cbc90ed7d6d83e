#include "dictminimax/rng.hpp"

#include <cmath>
#include <numbers>

namespace dictminimax {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kStreamSalt = 0xD1B54A32D192ED03ULL;
constexpr std::uint64_t kChildSalt = 0x8CB92BA72F3D8DD7ULL;
__extension__ using uint128 = unsigned __int128;
}  // namespace

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Rng::Rng(GeneratorSeed seed)
    : key_(mix64(mix64(seed.master_seed) ^ mix64(seed.stream_id * kStreamSalt + kGolden))) {}

Rng Rng::split(std::uint64_t child) const {
  return Rng(FromKey{}, mix64(key_ ^ mix64(child * kChildSalt + kGolden)));
}

std::uint64_t Rng::next_u64() {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::below(std::uint64_t n) {
  const auto wide = static_cast<uint128>(next_u64()) * n;
  return static_cast<std::uint64_t>(wide >> 64);
}

double Rng::normal() {
  // 1 - u lies in (0, 1], so the logarithm is finite.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace dictminimax
