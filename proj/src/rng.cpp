#include "covsteer/rng.hpp"

#include <cmath>
#include <numbers>

namespace covsteer {

// splitmix64 finalizer; full 64-bit avalanche.
uint64_t CounterRng::mix(uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace {

double to_unit_open(uint64_t bits) {
    // (0, 1): top 53 bits, shifted off zero
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

double CounterRng::normal(uint64_t step, uint64_t index) const {
    const uint64_t key = mix(mix(mix(seed_) ^ stream_) ^ (step * 0xd1342543de82ef95ULL + index));
    const uint64_t u_bits = mix(key);
    const uint64_t v_bits = mix(key ^ 0x5851f42d4c957f2dULL);
    const double u = to_unit_open(u_bits);
    const double v = to_unit_open(v_bits);
    // Box-Muller; one value per counter keeps the mapping stateless.
    return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * std::numbers::pi * v);
}

}  // namespace covsteer
