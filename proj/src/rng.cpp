#include "dexsafe/rng.hpp"

#include <cmath>

namespace dexsafe {

namespace {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

// splitmix64 finalizer
std::uint64_t mix(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::string_view name)
    : key_(mix(mix(seed + kGamma) ^ fnv1a(name))) {}

std::uint64_t RngStream::next_u64() {
  return mix(key_ + (++counter_) * kGamma);
}

double RngStream::next_double() {
  return double(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
  return lo + (hi - lo) * next_double();
}

double RngStream::gaussian(double sigma) {
  double u1 = next_double();
  double u2 = next_double();
  double r = std::sqrt(-2.0 * std::log1p(-u1));
  return sigma * r * std::cos(2.0 * M_PI * u2);
}

}  // namespace dexsafe
