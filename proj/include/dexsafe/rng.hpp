#pragma once

#include <cstdint>
#include <string_view>

namespace dexsafe {

// Counter-based generator. Draw i of a stream is mix(key + i * GAMMA) with
// mix the splitmix64 finalizer, so a stream is a pure function of
// (seed, name, counter). Streams keyed by different names never interact:
// adding draws to one cannot shift another.
class RngStream {
 public:
  RngStream() = default;
  RngStream(std::uint64_t seed, std::string_view name);

  std::uint64_t next_u64();
  // uniform in [0, 1), 53-bit mantissa
  double next_double();
  double uniform(double lo, double hi);
  // Box-Muller, consumes exactly two uniforms per call
  double gaussian(double sigma);

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace dexsafe
