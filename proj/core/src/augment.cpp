#include "airbench/augment.hpp"

#include <algorithm>
#include <cstring>
#include <numeric>
#include <string>

#include "airbench/errors.hpp"
#include "airbench/md5.hpp"
#include "airbench/thread_pool.hpp"

namespace airbench {

const char* to_string(FlipMode mode) {
    switch (mode) {
    case FlipMode::None: return "none";
    case FlipMode::Random: return "random";
    case FlipMode::Alternating: return "alternating";
    }
    return "none";
}

const char* to_string(SamplingMode mode) {
    switch (mode) {
    case SamplingMode::RandomReshuffle: return "random_reshuffle";
    case SamplingMode::WithReplacement: return "with_replacement";
    case SamplingMode::Sequential: return "sequential";
    }
    return "random_reshuffle";
}

FlipMode parse_flip_mode(const std::string& name) {
    if (name == "none") return FlipMode::None;
    if (name == "random") return FlipMode::Random;
    if (name == "alternating") return FlipMode::Alternating;
    throw ArgumentError("unknown flip mode '" + name + "'");
}

SamplingMode parse_sampling_mode(const std::string& name) {
    if (name == "random_reshuffle") return SamplingMode::RandomReshuffle;
    if (name == "with_replacement") return SamplingMode::WithReplacement;
    if (name == "sequential") return SamplingMode::Sequential;
    throw ArgumentError("unknown sampling mode '" + name + "'");
}

namespace detail {

void flip_image(float* img, int64_t c, int64_t h, int64_t w) {
    for (int64_t ch = 0; ch < c; ++ch) {
        for (int64_t y = 0; y < h; ++y) {
            float* row = img + (ch * h + y) * w;
            std::reverse(row, row + w);
        }
    }
}

namespace {
inline int64_t reflect(int64_t i, int64_t n) {
    if (i < 0) return -i;
    if (i >= n) return 2 * n - 2 - i;
    return i;
}
} // namespace

void translate_image(const float* src, float* dst, int64_t c, int64_t h, int64_t w,
                     int sy, int sx) {
    for (int64_t ch = 0; ch < c; ++ch) {
        const float* sp = src + ch * h * w;
        float* dp = dst + ch * h * w;
        for (int64_t y = 0; y < h; ++y) {
            int64_t ry = reflect(y + sy, h);
            for (int64_t x = 0; x < w; ++x) {
                dp[y * w + x] = sp[ry * w + reflect(x + sx, w)];
            }
        }
    }
}

void cutout_image(float* img, int64_t c, int64_t h, int64_t w, int cy, int cx, int size) {
    int64_t half = size / 2;
    int64_t y0 = std::max<int64_t>(0, cy - half);
    int64_t y1 = std::min<int64_t>(h, cy + half);
    int64_t x0 = std::max<int64_t>(0, cx - half);
    int64_t x1 = std::min<int64_t>(w, cx + half);
    if (y0 >= y1 || x0 >= x1) return;
    for (int64_t ch = 0; ch < c; ++ch) {
        for (int64_t y = y0; y < y1; ++y) {
            std::memset(img + (ch * h + y) * w + x0, 0,
                        static_cast<size_t>(x1 - x0) * sizeof(float));
        }
    }
}

} // namespace detail

void AugmentPolicy::validate() const {
    if (translate_px < 0 || translate_px >= 16) {
        throw ArgumentError("translate_px must be in [0, 16), got " +
                            std::to_string(translate_px));
    }
    if (cutout_px < 0 || cutout_px > 32) {
        throw ArgumentError("cutout_px must be in [0, 32], got " +
                            std::to_string(cutout_px));
    }
}

uint32_t hash_index(int64_t n, uint64_t seed) {
    if (n < 0) throw ArgumentError("hash_index needs n >= 0, got " + std::to_string(n));
    std::string digits = std::to_string(static_cast<uint64_t>(n) * seed);
    std::string hex = md5_hex(digits);
    return static_cast<uint32_t>(std::stoul(hex.substr(24), nullptr, 16));
}

bool flip_decision(const AugmentPolicy& policy, const RngStream& flip_rng,
                   int64_t index, int64_t epoch) {
    switch (policy.flip) {
        case FlipMode::None:
            return false;
        case FlipMode::Random:
            return (flip_rng.block_at(static_cast<uint64_t>(epoch),
                                      static_cast<uint64_t>(index))[0] &
                    1u) != 0;
        case FlipMode::Alternating:
            return ((hash_index(index) + static_cast<uint64_t>(epoch)) & 1u) == 1u;
    }
    return false;
}

namespace {

void check_image_batch(const Tensor& images) {
    if (images.rank() != 4) {
        throw ShapeError("expected [N,C,H,W] images, got " + shape_str(images.shape()));
    }
}

} // namespace

Tensor apply_flip(const Tensor& images, const std::vector<uint8_t>& mask) {
    check_image_batch(images);
    if (static_cast<int64_t>(mask.size()) != images.dim(0)) {
        throw ShapeError("flip mask has " + std::to_string(mask.size()) +
                         " entries for " + std::to_string(images.dim(0)) + " images");
    }
    Tensor out = images;
    int64_t c = images.dim(1), h = images.dim(2), w = images.dim(3);
    for (int64_t i = 0; i < images.dim(0); ++i) {
        if (mask[static_cast<size_t>(i)]) {
            detail::flip_image(out.data() + i * c * h * w, c, h, w);
        }
    }
    return out;
}

Tensor random_translate(const Tensor& images, int px, RngStream& rng) {
    check_image_batch(images);
    int64_t c = images.dim(1), h = images.dim(2), w = images.dim(3);
    if (px < 0 || px >= std::min(h, w)) {
        throw ArgumentError("translate padding " + std::to_string(px) +
                            " too large for " + shape_str(images.shape()));
    }
    Tensor out = images;
    if (px == 0) return out;
    uint32_t span = 2 * static_cast<uint32_t>(px) + 1;
    for (int64_t i = 0; i < images.dim(0); ++i) {
        int sy = static_cast<int>(rng.below(span)) - px;
        int sx = static_cast<int>(rng.below(span)) - px;
        detail::translate_image(images.data() + i * c * h * w, out.data() + i * c * h * w,
                                c, h, w, sy, sx);
    }
    return out;
}

Tensor cutout(const Tensor& images, int size, RngStream& rng) {
    check_image_batch(images);
    if (size < 0) throw ArgumentError("cutout size must be >= 0");
    Tensor out = images;
    if (size == 0) return out;
    int64_t c = images.dim(1), h = images.dim(2), w = images.dim(3);
    for (int64_t i = 0; i < images.dim(0); ++i) {
        int cy = static_cast<int>(rng.below(static_cast<uint32_t>(h)));
        int cx = static_cast<int>(rng.below(static_cast<uint32_t>(w)));
        detail::cutout_image(out.data() + i * c * h * w, c, h, w, cy, cx, size);
    }
    return out;
}

std::vector<int64_t> epoch_indices(SamplingMode mode, int64_t n, RngStream& rng) {
    if (n <= 0) throw ArgumentError("epoch_indices needs n > 0");
    switch (mode) {
        case SamplingMode::RandomReshuffle:
            return rng.permutation(n);
        case SamplingMode::WithReplacement: {
            std::vector<int64_t> out(static_cast<size_t>(n));
            for (auto& v : out) v = rng.below(static_cast<uint32_t>(n));
            return out;
        }
        case SamplingMode::Sequential: {
            std::vector<int64_t> out(static_cast<size_t>(n));
            std::iota(out.begin(), out.end(), int64_t{0});
            return out;
        }
    }
    throw ArgumentError("unknown sampling mode");
}

BatchStream::BatchStream(const Dataset& data, const AugmentPolicy& policy,
                         SamplingMode mode, int64_t batch_size, int64_t epoch,
                         bool drop_last, const NormalizeParams& norm)
    : data_(&data),
      policy_(policy),
      norm_(norm),
      batch_size_(batch_size),
      epoch_(epoch),
      flip_rng_(policy.seed, RngPurpose::Flip),
      translate_rng_(policy.seed, RngPurpose::Translate),
      cutout_rng_(policy.seed, RngPurpose::Cutout) {
    policy_.validate();
    if (batch_size <= 0) throw ArgumentError("batch_size must be positive");
    if (epoch < 0) throw ArgumentError("epoch must be >= 0");
    RngStream shuffle_rng(policy.seed, RngPurpose::Shuffle, static_cast<uint64_t>(epoch));
    order_ = epoch_indices(mode, data.n(), shuffle_rng);
    num_batches_ = drop_last ? data.n() / batch_size
                             : (data.n() + batch_size - 1) / batch_size;
}

void BatchStream::produce_image(int64_t index, float* dst) const {
    float buf[3 * 32 * 32];
    normalize_image(data_->image(index), buf, norm_);
    if (flip_decision(policy_, flip_rng_, index, epoch_)) {
        detail::flip_image(buf, 3, 32, 32);
    }
    if (policy_.translate_px > 0) {
        auto blk = translate_rng_.block_at(static_cast<uint64_t>(epoch_),
                                           static_cast<uint64_t>(index));
        uint32_t span = 2 * static_cast<uint32_t>(policy_.translate_px) + 1;
        int sy = static_cast<int>(blk[0] % span) - policy_.translate_px;
        int sx = static_cast<int>(blk[1] % span) - policy_.translate_px;
        detail::translate_image(buf, dst, 3, 32, 32, sy, sx);
    } else {
        std::memcpy(dst, buf, sizeof(buf));
    }
    if (policy_.cutout_px > 0) {
        auto blk = cutout_rng_.block_at(static_cast<uint64_t>(epoch_),
                                        static_cast<uint64_t>(index));
        detail::cutout_image(dst, 3, 32, 32, static_cast<int>(blk[0] % 32u),
                             static_cast<int>(blk[1] % 32u), policy_.cutout_px);
    }
}

bool BatchStream::next(Batch& out) {
    if (cursor_ >= num_batches_) return false;
    int64_t start = cursor_ * batch_size_;
    int64_t len = std::min(batch_size_, data_->n() - start);
    ++cursor_;

    out.images = Tensor({len, 3, 32, 32});
    out.labels.resize(static_cast<size_t>(len));
    out.indices.resize(static_cast<size_t>(len));
    for (int64_t p = 0; p < len; ++p) {
        int64_t i = order_[static_cast<size_t>(start + p)];
        out.indices[static_cast<size_t>(p)] = i;
        out.labels[static_cast<size_t>(p)] = data_->labels[static_cast<size_t>(i)];
    }
    float* base = out.images.data();
    ThreadPool::global().parallel_ranges(
        len, std::min<int64_t>(len, 16), [&](int64_t lo, int64_t hi, int64_t) {
            for (int64_t p = lo; p < hi; ++p) {
                produce_image(out.indices[static_cast<size_t>(p)], base + p * 3 * 32 * 32);
            }
        });
    return true;
}

} // namespace airbench
