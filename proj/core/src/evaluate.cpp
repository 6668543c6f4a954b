#include "airbench/evaluate.hpp"

#include <algorithm>

#include "airbench/errors.hpp"
#include "airbench/kernels.hpp"

namespace airbench {

namespace {

Tensor mirror_x(const Tensor& images) {
    Tensor out(images.shape());
    int64_t n = images.dim(0), c = images.dim(1), h = images.dim(2), w = images.dim(3);
    for (int64_t i = 0; i < n * c * h; ++i) {
        const float* src = images.data() + i * w;
        float* dst = out.data() + i * w;
        for (int64_t x = 0; x < w; ++x) dst[x] = src[w - 1 - x];
    }
    return out;
}

// 32x32 window of a reflect-padded batch starting at (oy, ox)
Tensor padded_window(const Tensor& padded, int64_t oy, int64_t ox) {
    int64_t n = padded.dim(0), c = padded.dim(1);
    int64_t h = padded.dim(2) - 2, w = padded.dim(3) - 2;
    Tensor out({n, c, h, w});
    for (int64_t i = 0; i < n * c; ++i) {
        for (int64_t y = 0; y < h; ++y) {
            const float* src = padded.data() + (i * (h + 2) + y + oy) * (w + 2) + ox;
            std::copy(src, src + w, out.data() + (i * h + y) * w);
        }
    }
    return out;
}

Tensor mirror_pair(Net& net, const Tensor& x) {
    Tensor a = net.forward(x, false);
    Tensor b = net.forward(mirror_x(x), false);
    for (int64_t i = 0; i < a.numel(); ++i)
        a.data()[i] = 0.5f * a.data()[i] + 0.5f * b.data()[i];
    return a;
}

} // namespace

Tensor infer(Net& net, const Tensor& images, int tta_level, int64_t chunk_size) {
    if (tta_level < 0 || tta_level > 2)
        throw ArgumentError("tta level must be 0, 1, or 2, got " + std::to_string(tta_level));
    if (chunk_size <= 0) throw ArgumentError("chunk size must be > 0");
    if (images.rank() != 4) throw ShapeError("infer expects [N,C,H,W] images");

    int64_t n = images.dim(0);
    int64_t per_image = images.dim(1) * images.dim(2) * images.dim(3);
    Tensor out;
    for (int64_t begin = 0; begin < n; begin += chunk_size) {
        int64_t len = std::min(chunk_size, n - begin);
        Tensor x({len, images.dim(1), images.dim(2), images.dim(3)});
        std::copy(images.data() + begin * per_image,
                  images.data() + (begin + len) * per_image, x.data());

        Tensor logits;
        if (tta_level == 0) {
            logits = net.forward(x, false);
        } else if (tta_level == 1) {
            logits = mirror_pair(net, x);
        } else {
            logits = mirror_pair(net, x);
            Tensor padded = reflect_pad2d(x, 1);
            Tensor up_left = mirror_pair(net, padded_window(padded, 0, 0));
            Tensor down_right = mirror_pair(net, padded_window(padded, 2, 2));
            for (int64_t i = 0; i < logits.numel(); ++i) {
                logits.data()[i] = 0.5f * logits.data()[i] +
                                   0.25f * up_left.data()[i] + 0.25f * down_right.data()[i];
            }
        }

        if (out.numel() == 0) out = Tensor({n, logits.dim(1)});
        std::copy(logits.data(), logits.data() + logits.numel(),
                  out.data() + begin * logits.dim(1));
    }
    return out;
}

double accuracy(const Tensor& logits, const std::vector<int32_t>& labels) {
    if (logits.rank() != 2) throw ShapeError("accuracy expects [N,K] logits");
    int64_t n = logits.dim(0), k = logits.dim(1);
    if (static_cast<int64_t>(labels.size()) != n)
        throw ShapeError("labels length " + std::to_string(labels.size()) + " vs N " +
                         std::to_string(n));
    if (n == 0) return 0.0;
    int64_t correct = 0;
    for (int64_t i = 0; i < n; ++i) {
        const float* row = logits.data() + i * k;
        int64_t best = 0;
        for (int64_t j = 1; j < k; ++j) {
            if (row[j] > row[best]) best = j;
        }
        if (best == labels[static_cast<size_t>(i)]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(n);
}

} // namespace airbench
