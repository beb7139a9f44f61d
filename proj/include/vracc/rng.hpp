#pragma once

#include <cmath>
#include <cstdint>

namespace vracc {

/// Counter-based pseudo-random source. Each draw hashes (key, counter) with
/// the splitmix64 finalizer, so streams are splittable and runs with the same
/// seed are bitwise reproducible across platforms.
class SplitRng {
 public:
  explicit SplitRng(std::uint64_t seed) : key_(mix(seed ^ 0x5851F42D4C957F2Dull)) {}

  /// Derives an independent child stream; the parent's state is untouched.
  SplitRng split(std::uint64_t stream) const {
    return SplitRng(mix(key_ + mix(stream ^ 0xD1B54A32D192ED03ull)));
  }

  std::uint64_t next_u64() { return mix(key_ + 0x9E3779B97F4A7C15ull * ++counter_); }

  /// Uniform on [0, 1).
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller (one value per two uniforms).
  double next_gaussian() {
    double u1 = 1.0 - next_double();  // (0, 1]
    double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925 * u2);
  }

 private:
  static std::uint64_t mix(std::uint64_t v) {
    v += 0x9E3779B97F4A7C15ull;
    v = (v ^ (v >> 30)) * 0xBF58476D1CE4E5B9ull;
    v = (v ^ (v >> 27)) * 0x94D049BB133111EBull;
    return v ^ (v >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace vracc
