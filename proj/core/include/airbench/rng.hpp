#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace airbench {

// Philox4x32-10 block function: 4 output words from a 128-bit counter and a
// 64-bit key. Counter-based, so any (counter, key) pair can be evaluated
// independently of every other draw.
std::array<uint32_t, 4> philox4x32(uint32_t k0, uint32_t k1,
                                   uint32_t c0, uint32_t c1, uint32_t c2, uint32_t c3);

uint64_t splitmix64(uint64_t x);

// Purpose tags keep the random streams of unrelated subsystems independent:
// enabling one augmentation never shifts another's draws.
enum class RngPurpose : uint32_t {
    WeightInit = 1,
    Shuffle = 2,
    Flip = 3,
    Translate = 4,
    Cutout = 5,
    WarmupLabels = 6,
    Coverage = 7,
    Synthetic = 8,
    Test = 100,
};

// A seedable stream over the Philox block function. Supports both sequential
// draws (internal counter) and keyed draws addressed by (slot, index) pairs,
// used for per-(epoch, image) augmentation decisions that must not depend on
// batch composition.
class RngStream {
public:
    RngStream(uint64_t seed, RngPurpose purpose, uint64_t stream = 0);

    uint32_t u32();
    uint64_t u64();
    // Uniform in [0, 1) with 53 random bits.
    double unit();
    float unit_float();
    // Uniform integer in [0, n). Modulo reduction; bias is < n / 2^32.
    uint32_t below(uint32_t n);
    float uniform(float lo, float hi);
    bool coin() { return (u32() & 1u) != 0; }

    // Fisher-Yates permutation of 0..n-1.
    std::vector<int64_t> permutation(int64_t n);

    // Stateless block addressed by (hi, lo); does not advance the stream.
    std::array<uint32_t, 4> block_at(uint64_t hi, uint64_t lo) const;

private:
    void refill();

    uint32_t key0_ = 0, key1_ = 0;
    uint64_t counter_ = 0;
    std::array<uint32_t, 4> buf_{};
    int buf_pos_ = 4;
};

} // namespace airbench
