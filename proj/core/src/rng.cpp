#include "airbench/rng.hpp"

namespace airbench {

namespace {

constexpr uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void philox_round(uint32_t& c0, uint32_t& c1, uint32_t& c2, uint32_t& c3,
                         uint32_t k0, uint32_t k1) {
    uint64_t p0 = static_cast<uint64_t>(kPhiloxM0) * c0;
    uint64_t p1 = static_cast<uint64_t>(kPhiloxM1) * c2;
    uint32_t h0 = static_cast<uint32_t>(p0 >> 32), l0 = static_cast<uint32_t>(p0);
    uint32_t h1 = static_cast<uint32_t>(p1 >> 32), l1 = static_cast<uint32_t>(p1);
    uint32_t n0 = h1 ^ c1 ^ k0;
    uint32_t n1 = l1;
    uint32_t n2 = h0 ^ c3 ^ k1;
    uint32_t n3 = l0;
    c0 = n0; c1 = n1; c2 = n2; c3 = n3;
}

} // namespace

std::array<uint32_t, 4> philox4x32(uint32_t k0, uint32_t k1,
                                   uint32_t c0, uint32_t c1, uint32_t c2, uint32_t c3) {
    for (int round = 0; round < 10; ++round) {
        philox_round(c0, c1, c2, c3, k0, k1);
        k0 += kPhiloxW0;
        k1 += kPhiloxW1;
    }
    return {c0, c1, c2, c3};
}

uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

RngStream::RngStream(uint64_t seed, RngPurpose purpose, uint64_t stream) {
    uint64_t key = splitmix64(seed);
    key = splitmix64(key ^ static_cast<uint64_t>(purpose));
    key = splitmix64(key ^ stream);
    key0_ = static_cast<uint32_t>(key);
    key1_ = static_cast<uint32_t>(key >> 32);
}

void RngStream::refill() {
    buf_ = block_at(0, counter_++);
    buf_pos_ = 0;
}

uint32_t RngStream::u32() {
    if (buf_pos_ >= 4) refill();
    return buf_[static_cast<size_t>(buf_pos_++)];
}

uint64_t RngStream::u64() {
    uint64_t lo = u32(), hi = u32();
    return (hi << 32) | lo;
}

double RngStream::unit() {
    return static_cast<double>(u64() >> 11) * 0x1.0p-53;
}

float RngStream::unit_float() {
    return static_cast<float>(u32() >> 8) * 0x1.0p-24f;
}

uint32_t RngStream::below(uint32_t n) {
    return n ? u32() % n : 0;
}

float RngStream::uniform(float lo, float hi) {
    return lo + (hi - lo) * unit_float();
}

std::vector<int64_t> RngStream::permutation(int64_t n) {
    std::vector<int64_t> p(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i) p[static_cast<size_t>(i)] = i;
    for (int64_t i = n - 1; i > 0; --i) {
        uint32_t j = below(static_cast<uint32_t>(i + 1));
        std::swap(p[static_cast<size_t>(i)], p[j]);
    }
    return p;
}

std::array<uint32_t, 4> RngStream::block_at(uint64_t hi, uint64_t lo) const {
    return philox4x32(key0_, key1_,
                      static_cast<uint32_t>(lo), static_cast<uint32_t>(lo >> 32),
                      static_cast<uint32_t>(hi), static_cast<uint32_t>(hi >> 32));
}

} // namespace airbench
