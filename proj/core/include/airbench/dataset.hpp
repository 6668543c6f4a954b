#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "airbench/tensor.hpp"

namespace airbench {

// Raw image corpus: N images of 3x32x32 unsigned bytes (channel-planar,
// row-major) plus integer labels. Kept in byte form; normalization to float
// happens per batch.
struct Dataset {
    std::vector<uint8_t> images; // n * 3*32*32 bytes
    std::vector<int32_t> labels; // n entries in [0, classes)
    std::vector<std::string> classes;

    int64_t n() const { return static_cast<int64_t>(labels.size()); }
    int64_t num_classes() const { return static_cast<int64_t>(classes.size()); }
    const uint8_t* image(int64_t i) const { return images.data() + i * 3072; }
    uint8_t* image(int64_t i) { return images.data() + i * 3072; }

    void validate() const;
};

struct NormalizeParams {
    std::array<float, 3> mean;
    std::array<float, 3> std;
};

// Standard CIFAR-10 statistics.
inline constexpr NormalizeParams kCifarNorm = {
    {0.4914f, 0.4822f, 0.4465f},
    {0.2470f, 0.2435f, 0.2616f},
};

// Loads the official CIFAR-10 binary batches from dir. split is "train"
// (data_batch_1..5.bin concatenated in order) or "test" (test_batch.bin).
// Record layout: 1 label byte + 3072 channel-planar pixel bytes.
Dataset load_cifar10(const std::string& dir, const std::string& split);

// Generic 32x32 dataset archive: magic "ADS1", u32-LE image count, u8 class
// count, then N*3072 image bytes followed by N label bytes.
Dataset load_ads1(const std::string& path);
void save_ads1(const std::string& path, const Dataset& data);

// (byte/255 - mean_c) / std_c for every image, as one [N,3,32,32] tensor.
Tensor normalize(const Dataset& data, const NormalizeParams& p = kCifarNorm);

// Normalize a single 3*32*32 image into dst.
void normalize_image(const uint8_t* src, float* dst, const NormalizeParams& p);

// Deterministic CIFAR-shaped synthetic corpus: each class is a mixture of
// sinusoidal textures and a color bias, mirrored left-right with probability
// 1/2, plus per-pixel noise. Same (seed, id_base) always yields the same
// bytes; use different id_base values for disjoint train/test splits.
Dataset make_synthetic(int64_t n, uint64_t seed, int64_t num_classes = 10,
                       uint64_t id_base = 0);

} // namespace airbench
