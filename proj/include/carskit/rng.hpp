#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace carskit {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace detail

// xoshiro256++ with explicit seeding. All distribution code lives here so
// that streams are bit-identical across platforms (the standard library's
// distributions are not specified that tightly).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : origin_(seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = detail::splitmix64(sm);
  }

  std::uint64_t next() {
    const std::uint64_t result =
        detail::rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl(state_[3], 45);
    return result;
  }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform on {0, ..., n-1}, rejection to avoid modulo bias.
  std::uint64_t uniform_index(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = next();
      if (r >= threshold) return r % n;
    }
  }

  // Uniform integer on the inclusive range [lo, hi].
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(
                    uniform_index(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  // Standard normal via Box-Muller; caches the paired deviate.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 =
        (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // Independent stream derived from the original seed and a counter.
  // Counter-based so that per-item substreams do not depend on draw order.
  Rng substream(std::uint64_t counter) const {
    std::uint64_t sm = origin_;
    const std::uint64_t a = detail::splitmix64(sm);
    sm = counter ^ 0xd1b54a32d192ed03ULL;
    const std::uint64_t b = detail::splitmix64(sm);
    return Rng(a ^ detail::rotl(b, 31));
  }

  std::uint64_t origin_seed() const { return origin_; }

 private:
  std::array<std::uint64_t, 4> state_{};
  std::uint64_t origin_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace carskit
