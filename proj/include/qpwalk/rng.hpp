#pragma once

// Counter-based pseudorandom streams (SplitMix64 core).
// Each trajectory gets an independent stream derived from (seed, index),
// so results never depend on thread scheduling.

#include <cstdint>

namespace qpwalk {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

class RngStream {
public:
    RngStream(uint64_t seed, uint64_t stream_index)
        : state_(splitmix64(seed ^ splitmix64(stream_index + 0x632be59bd9b4e019ULL))) {}

    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0,1)
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

private:
    uint64_t state_;
};

} // namespace qpwalk
