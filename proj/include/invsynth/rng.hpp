#ifndef INVSYNTH_RNG_HPP
#define INVSYNTH_RNG_HPP

#include <cstdint>
#include <initializer_list>
#include <random>

namespace invsynth {

// SplitMix64 finalizer. Used to derive independent sub-seeds so that every
// consumer of randomness (input sampling, label coins, solver phases, ...)
// draws from its own stream.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base,
                                    std::initializer_list<std::uint64_t> salts) {
  std::uint64_t s = mix64(base);
  for (std::uint64_t salt : salts) s = mix64(s ^ mix64(salt + 0x632BE59BD9B4E019ULL));
  return s;
}

using Rng = std::mt19937_64;

// Uniform in [0, bound). Rejection sampling keeps the result identical across
// standard libraries, unlike std::uniform_int_distribution.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
  if (bound <= 1) return 0;
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  for (;;) {
    const std::uint64_t r = rng();
    if (r < limit) return r % bound;
  }
}

inline double uniform_unit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace invsynth

#endif  // INVSYNTH_RNG_HPP
