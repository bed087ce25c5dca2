#pragma once

#include <cstdint>
#include <random>

namespace fpxl {

// Deterministic uniform generator. std::mt19937_64 is bit-exact across
// platforms but the standard distributions are not, so we map raw draws
// to doubles ourselves. Every consumer of randomness in the project goes
// through this class to keep outputs reproducible for a given seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform sign, +1 or -1.
  double sign() { return (engine_() & 1u) ? 1.0 : -1.0; }

  std::uint64_t integer() { return engine_(); }

  // Derive an independent stream for sub-task `index` (splitmix64 mix),
  // so candidate k is the same whether 8 or 64 candidates are requested.
  static std::uint64_t substream(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace fpxl
