#pragma once

#include <cstdint>
#include <random>

namespace qcrelax {

/// Seeded generator with a platform-independent output sequence.
///
/// Raw bits come from std::mt19937_64, whose sequence is fixed by the C++
/// standard. Doubles are formed from the top 53 bits as k * 2^-53 in [0, 1)
/// instead of std::uniform_real_distribution, which is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::uint64_t bits() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace qcrelax
