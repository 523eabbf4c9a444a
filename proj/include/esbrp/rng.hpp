#pragma once

#include <cstdint>
#include <random>

namespace esbrp {

// Seeded RNG with explicit mappings so streams are identical across
// platforms; the standard distributions are implementation-defined.
class Rng {
  public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t next() { return gen_(); }

    // Uniform integer in [0, n).
    int below(int n) { return n <= 1 ? 0 : static_cast<int>(next() % static_cast<uint64_t>(n)); }

    // Uniform double in [0, 1).
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

    // Uniform integer in [lo, hi].
    int between(int lo, int hi) { return lo + below(hi - lo + 1); }

  private:
    std::mt19937_64 gen_;
};

} // namespace esbrp
