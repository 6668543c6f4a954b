#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "airbench/dataset.hpp"
#include "airbench/rng.hpp"
#include "airbench/tensor.hpp"

namespace airbench {

enum class FlipMode { None, Random, Alternating };

enum class SamplingMode { RandomReshuffle, WithReplacement, Sequential };

const char* to_string(FlipMode mode);
const char* to_string(SamplingMode mode);
FlipMode parse_flip_mode(const std::string& name);
SamplingMode parse_sampling_mode(const std::string& name);

struct AugmentPolicy {
    FlipMode flip = FlipMode::None;
    int translate_px = 0;
    int cutout_px = 0;
    uint64_t seed = 0;

    void validate() const;
};

// last 8 hex digits of MD5(decimal(n * seed)) as an unsigned 32-bit value.
uint32_t hash_index(int64_t n, uint64_t seed = 42);

// Per-(image, epoch) flip decision. Alternating mode is the hash parity rule
// flip <=> (hash_index(index) + epoch) % 2 == 1, so consecutive epochs always
// disagree and any two-epoch window covers both orientations of every image.
// Random mode takes an i.i.d. Bernoulli(1/2) draw from the flip stream, keyed
// by (epoch, index) so the decision never depends on batch composition.
bool flip_decision(const AugmentPolicy& policy, const RngStream& flip_rng,
                   int64_t index, int64_t epoch);

// Reverse masked images along the width axis.
Tensor apply_flip(const Tensor& images, const std::vector<uint8_t>& mask);

// Reflect-pad by px and take a per-image crop at a shift drawn uniformly from
// [-px, px] on each axis.
Tensor random_translate(const Tensor& images, int px, RngStream& rng);

// Zero a size x size square (clipped at the borders) around a uniformly random
// center per image. Fill value 0 is the per-channel mean in normalized space.
Tensor cutout(const Tensor& images, int size, RngStream& rng);

std::vector<int64_t> epoch_indices(SamplingMode mode, int64_t n, RngStream& rng);

struct Batch {
    Tensor images;                // [B,3,32,32], normalized and augmented
    std::vector<int32_t> labels;  // B
    std::vector<int64_t> indices; // original dataset indices
};

// One epoch of augmented batches in sampled order. Every per-image transform
// is keyed by (epoch, original index), so the produced pixels for an image are
// identical under any sampling mode or batch size.
class BatchStream {
public:
    BatchStream(const Dataset& data, const AugmentPolicy& policy, SamplingMode mode,
                int64_t batch_size, int64_t epoch, bool drop_last,
                const NormalizeParams& norm = kCifarNorm);

    bool next(Batch& out);
    int64_t num_batches() const { return num_batches_; }
    int64_t epoch() const { return epoch_; }

    // Normalize + augment one dataset image into dst (3*32*32 floats),
    // exactly as next() would. Exposed for order-independence tests.
    void produce_image(int64_t index, float* dst) const;

private:
    const Dataset* data_;
    AugmentPolicy policy_;
    NormalizeParams norm_;
    int64_t batch_size_;
    int64_t epoch_;
    std::vector<int64_t> order_;
    int64_t num_batches_;
    int64_t cursor_ = 0;
    RngStream flip_rng_;
    RngStream translate_rng_;
    RngStream cutout_rng_;
};

namespace detail {
// In-place width reversal of a C x H x W image.
void flip_image(float* img, int64_t c, int64_t h, int64_t w);
// dst(y, x) = src(reflect(y + sy), reflect(x + sx)): the (sy, sx) crop of the
// reflect-padded source.
void translate_image(const float* src, float* dst, int64_t c, int64_t h, int64_t w,
                     int sy, int sx);
// Zero [cy - size/2, cy + size/2) x [cx - size/2, cx + size/2) clipped.
void cutout_image(float* img, int64_t c, int64_t h, int64_t w, int cy, int cx, int size);
} // namespace detail

} // namespace airbench
