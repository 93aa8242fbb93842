#ifndef CFPO_RNG_HPP_
#define CFPO_RNG_HPP_

#include <cmath>
#include <cstdint>

namespace cfpo {

// SplitMix64 finalizer (Steele et al.). Full-avalanche 64-bit mixer.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Counter-based, splittable PRNG. A stream is a 64-bit key plus a counter;
// each output is a hash of (key, counter), so draws depend only on the
// stream's derivation path and position, never on which thread consumed
// them. substream() derives an independent key, which is how per-(step,
// prompt, sample) streams are handed to parallel workers.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed)
      : key_(splitmix64(splitmix64(seed) ^ 0x5851f42d4c957f2dull)) {}

  // Independent stream addressed by `index` under this stream's key.
  RngStream substream(std::uint64_t index) const {
    RngStream child(*this);
    child.key_ = splitmix64(key_ ^ splitmix64(index + 0x9e3779b97f4a7c15ull));
    child.counter_ = 0;
    return child;
  }

  std::uint64_t next_u64() {
    return splitmix64(key_ + splitmix64(counter_++));
  }

  // Uniform in [0, 1), 53-bit resolution.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform in [0, n). Unbiased via rejection.
  std::uint64_t next_below(std::uint64_t n) {
    const std::uint64_t bound = (~0ull / n) * n;
    std::uint64_t x = next_u64();
    while (x >= bound) x = next_u64();
    return x % n;
  }

  // Standard normal via Box-Muller; consumes exactly two draws.
  double next_gaussian() {
    const double u1 = 1.0 - next_double();  // (0, 1]
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  // Exp(1), used for Dirichlet sampling.
  double next_exponential() { return -std::log(1.0 - next_double()); }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace cfpo

#endif  // CFPO_RNG_HPP_
