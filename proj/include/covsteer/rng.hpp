#pragma once

#include <cstdint>

namespace covsteer {

// Counter-based Gaussian stream: every draw is a pure function of
// (seed, stream, step, index), so paths are reproducible independently of
// evaluation order or thread count.
class CounterRng {
  public:
    CounterRng(uint64_t seed, uint64_t stream) : seed_(seed), stream_(stream) {}

    // Standard normal draw `index` at step `step` of this stream.
    double normal(uint64_t step, uint64_t index) const;

    static uint64_t mix(uint64_t z);

  private:
    uint64_t seed_;
    uint64_t stream_;
};

}  // namespace covsteer
