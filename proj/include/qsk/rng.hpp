#pragma once

#include <cstdint>

namespace qsk {

// Deterministic, splittable PRNG. The base generator is splitmix64
// (Steele, Lea, Flood 2014); fork() derives an independent stream from a
// stream tag, which is how per-block and per-retry randomness is produced.
// All uniform doubles come from the top 53 bits, so sketches built from
// the same seed are bit-identical across platforms.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform in [lo, hi).
    double next_double(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

    // Uniform integer in [0, bound).
    std::uint64_t next_below(std::uint64_t bound) {
        return next_u64() % bound;
    }

    // Independent child stream identified by tag.
    Rng fork(std::uint64_t tag) const {
        Rng mixer(state_ ^ (tag * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL));
        return Rng(mixer.next_u64());
    }

  private:
    std::uint64_t state_;
};

}  // namespace qsk
