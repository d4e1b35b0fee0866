#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace pcast {

// Single splitmix64 step. Used both as a stream deriver and to spread
// low-entropy seeds before they hit the mt19937_64 state.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent substream seed for (base, salt). Every component that needs
// its own stream (assignment, packet generation, per-packet forwarding
// decisions) derives through here so streams never alias.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
  return splitmix64(splitmix64(base) ^ splitmix64(~salt));
}

// mt19937_64 is specified bit-for-bit by the standard; the distributions
// around it are not. Rng wraps the engine with fixed-algorithm draws so the
// same seed gives the same sequence on every toolchain.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(splitmix64(seed)) {}

  std::uint64_t bits() { return eng_(); }

  // uniform in [0, 1), 53-bit resolution
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // uniform integer in [0, n), rejection sampled, n >= 1
  std::uint64_t uniform_int(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = ~std::uint64_t{0} - ~std::uint64_t{0} % n;
    std::uint64_t x;
    do {
      x = eng_();
    } while (x >= limit);
    return x % n;
  }

  // exponential with the given mean; uniform() < 1 keeps the log argument in (0, 1]
  double exponential(double mean) { return -mean * std::log(1.0 - uniform()); }

 private:
  std::mt19937_64 eng_;
};

} // namespace pcast
