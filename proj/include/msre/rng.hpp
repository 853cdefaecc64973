#pragma once

#include <cstdint>

#include "msre/common.hpp"

namespace msre {

// Threefry-2x64, 20 rounds. Counter-based: output is a pure function of
// (key, counter), so draws can be indexed by (vertex, resample, draw) and the
// result never depends on scheduling or worker count.
struct Threefry2x64 {
    uint64_t key[2];

    explicit Threefry2x64(uint64_t k0, uint64_t k1) : key{k0, k1} {}

    static constexpr uint64_t kParity = 0x1BD11BDAA9FC1A22ULL;
    static constexpr int kRot[8] = {16, 42, 12, 31, 16, 32, 24, 21};

    void block(uint64_t c0, uint64_t c1, uint64_t out[2]) const {
        uint64_t ks[3] = {key[0], key[1], kParity ^ key[0] ^ key[1]};
        uint64_t x0 = c0 + ks[0];
        uint64_t x1 = c1 + ks[1];
        for (int round = 0; round < 20; ++round) {
            x0 += x1;
            int r = kRot[round & 7];
            x1 = (x1 << r) | (x1 >> (64 - r));
            x1 ^= x0;
            if ((round & 3) == 3) {
                int s = round / 4 + 1;
                x0 += ks[s % 3];
                x1 += ks[(s + 1) % 3] + static_cast<uint64_t>(s);
            }
        }
        out[0] = x0;
        out[1] = x1;
    }

    uint64_t at(uint64_t c0, uint64_t c1) const {
        uint64_t out[2];
        block(c0, c1, out);
        return out[0];
    }
};

// strictly inside (0,1): (x >> 11) * 2^-53 + 2^-54
inline double to_unit_open(uint64_t x) {
    return static_cast<double>(x >> 11) * 0x1p-53 + 0x1p-54;
}

// inverse normal CDF, Wichura's AS241 (double precision, good into far tails)
double normal_icdf(double p);

// One logical Gaussian stream addressed by counters. `stream` separates
// independent uses (disorder tables, resampled hats, walker steps, ...).
struct GaussianStream {
    Threefry2x64 prf;

    GaussianStream(uint64_t seed, uint64_t stream) : prf(seed, stream) {}

    // independent N(0,1) draws for distinct (slot, draw) pairs
    double normal(uint64_t slot, uint64_t draw) const {
        return normal_icdf(to_unit_open(prf.at(slot, draw)));
    }
    double uniform(uint64_t slot, uint64_t draw) const {
        return to_unit_open(prf.at(slot, draw));
    }
    uint64_t bits(uint64_t slot, uint64_t draw) const { return prf.at(slot, draw); }
};

// slot packing for per-vertex, per-resample addressing
inline uint64_t pack_slot(uint64_t resample_index, uint64_t vertex_index) {
    require(vertex_index < (1ULL << 32), "vertex index exceeds slot packing range");
    require(resample_index < (1ULL << 32), "resample index exceeds slot packing range");
    return (resample_index << 32) | vertex_index;
}

// stream tags (documented so streams never collide across modules)
enum StreamTag : uint64_t {
    kStreamDisorder = 1,
    kStreamHatResample = 2,
    kStreamWalk = 3,
    kStreamDescentInit = 4,
    kStreamMetropolis = 5,
    kStreamBootstrap = 6,
    kStreamPermutation = 7,
    kStreamSynthetic = 8,
};

}  // namespace msre
