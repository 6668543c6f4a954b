#include <doctest.h>

#include <algorithm>
#include <cstdint>
#include <set>
#include <vector>

#include "airbench/rng.hpp"

using namespace airbench;

// Known-answer vectors for the Philox4x32-10 block function, from the
// reference implementation's test suite.
TEST_CASE("philox4x32-10 known-answer vectors") {
    auto zero = philox4x32(0, 0, 0, 0, 0, 0);
    CHECK(zero[0] == 0x6627e8d5u);
    CHECK(zero[1] == 0xe169c58du);
    CHECK(zero[2] == 0xbc57ac4cu);
    CHECK(zero[3] == 0x9b00dbd8u);

    auto ones = philox4x32(0xffffffffu, 0xffffffffu,
                           0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu);
    CHECK(ones[0] == 0x408f276du);
    CHECK(ones[1] == 0x41c83b0eu);
    CHECK(ones[2] == 0xa20bc7c6u);
    CHECK(ones[3] == 0x6d5451fdu);

    auto pi = philox4x32(0xa4093822u, 0x299f31d0u,
                         0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u);
    CHECK(pi[0] == 0xd16cfe09u);
    CHECK(pi[1] == 0x94fdccebu);
    CHECK(pi[2] == 0x5001e420u);
    CHECK(pi[3] == 0x24126ea1u);
}

TEST_CASE("streams are deterministic and purpose-separated") {
    RngStream a(123, RngPurpose::Shuffle);
    RngStream b(123, RngPurpose::Shuffle);
    for (int i = 0; i < 100; ++i) CHECK(a.u32() == b.u32());

    // Same seed, different purpose: different sequence.
    RngStream c(123, RngPurpose::Flip);
    RngStream d(123, RngPurpose::Shuffle);
    int differ = 0;
    for (int i = 0; i < 16; ++i) differ += (c.u32() != d.u32());
    CHECK(differ > 0);

    // Same purpose, different stream index: different sequence.
    RngStream e(123, RngPurpose::Shuffle, 1);
    RngStream f(123, RngPurpose::Shuffle, 2);
    differ = 0;
    for (int i = 0; i < 16; ++i) differ += (e.u32() != f.u32());
    CHECK(differ > 0);
}

TEST_CASE("unit draws live in [0, 1)") {
    RngStream rng(7, RngPurpose::Test);
    for (int i = 0; i < 10000; ++i) {
        double u = rng.unit();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        float uf = rng.unit_float();
        CHECK(uf >= 0.0f);
        CHECK(uf < 1.0f);
    }
}

TEST_CASE("below stays in range and covers all residues") {
    RngStream rng(11, RngPurpose::Test);
    std::set<uint32_t> seen;
    for (int i = 0; i < 1000; ++i) {
        uint32_t v = rng.below(10);
        CHECK(v < 10);
        seen.insert(v);
    }
    CHECK(seen.size() == 10);
    CHECK(rng.below(0) == 0);
    CHECK(rng.below(1) == 0);
}

TEST_CASE("uniform stays inside its interval") {
    RngStream rng(3, RngPurpose::Test);
    for (int i = 0; i < 1000; ++i) {
        float v = rng.uniform(-2.5f, 4.0f);
        CHECK(v >= -2.5f);
        CHECK(v < 4.0f);
    }
}

TEST_CASE("permutation is a bijection and varies with seed") {
    RngStream rng(42, RngPurpose::Shuffle);
    auto p = rng.permutation(257);
    std::vector<int64_t> sorted = p;
    std::sort(sorted.begin(), sorted.end());
    for (int64_t i = 0; i < 257; ++i) CHECK(sorted[static_cast<size_t>(i)] == i);

    RngStream rng2(43, RngPurpose::Shuffle);
    auto q = rng2.permutation(257);
    CHECK(p != q);

    // Degenerate sizes.
    CHECK(RngStream(0, RngPurpose::Test).permutation(0).empty());
    CHECK(RngStream(0, RngPurpose::Test).permutation(1) == std::vector<int64_t>{0});
}

TEST_CASE("block_at is stateless and independent of sequential draws") {
    RngStream rng(99, RngPurpose::Flip);
    auto before = rng.block_at(5, 17);
    for (int i = 0; i < 37; ++i) (void)rng.u32();
    auto after = rng.block_at(5, 17);
    CHECK(before == after);

    // Distinct addresses give distinct blocks (all 2^128 would collide with
    // probability ~0; a handful certainly should not).
    std::set<uint32_t> words;
    for (uint64_t hi = 0; hi < 4; ++hi)
        for (uint64_t lo = 0; lo < 4; ++lo)
            words.insert(rng.block_at(hi, lo)[0]);
    CHECK(words.size() == 16);
}

TEST_CASE("coin produces both faces") {
    RngStream rng(5, RngPurpose::Test);
    int heads = 0;
    for (int i = 0; i < 1000; ++i) heads += rng.coin();
    CHECK(heads > 400);
    CHECK(heads < 600);
}
