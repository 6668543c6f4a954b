#include "airbench/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

#include "airbench/gemm.hpp"
#include "airbench/simd_math.hpp"

namespace airbench {

namespace {

struct ConvDims {
    int64_t n, cin, h, w;        // input
    int64_t cout, kh, kw;        // filter
    int64_t pt, pl;              // top/left zero padding
    int64_t ho, wo;              // output spatial
    int64_t kdim;                // cin*kh*kw
};

ConvDims conv_dims(const Tensor& input, const Tensor& weight, Padding padding) {
    if (input.rank() != 4 || weight.rank() != 4)
        throw ShapeError("conv2d expects rank-4 input and weight, got " +
                         shape_str(input.shape()) + " and " + shape_str(weight.shape()));
    ConvDims d;
    d.n = input.dim(0); d.cin = input.dim(1); d.h = input.dim(2); d.w = input.dim(3);
    d.cout = weight.dim(0); d.kh = weight.dim(2); d.kw = weight.dim(3);
    if (weight.dim(1) != d.cin)
        throw ShapeError("conv2d channel mismatch: input Cin " + std::to_string(d.cin) +
                         " vs weight Cin " + std::to_string(weight.dim(1)));
    if (padding == Padding::Same) {
        // Even kernels put the extra padding at the bottom/right.
        d.pt = (d.kh - 1) / 2;
        d.pl = (d.kw - 1) / 2;
        d.ho = d.h;
        d.wo = d.w;
    } else {
        d.pt = d.pl = 0;
        d.ho = d.h - d.kh + 1;
        d.wo = d.w - d.kw + 1;
    }
    if (d.ho <= 0 || d.wo <= 0)
        throw ShapeError("conv2d kernel larger than input: " + shape_str(input.shape()) +
                         " with " + shape_str(weight.shape()));
    d.kdim = d.cin * d.kh * d.kw;
    return d;
}

// Number of images whose columns go into one GEMM call; aims for a few
// thousand GEMM columns so the microkernel stays efficient on small maps.
int64_t chunk_images(const ConvDims& d) {
    int64_t target = 4096;
    int64_t g = (target + d.ho * d.wo - 1) / (d.ho * d.wo);
    return std::clamp<int64_t>(g, 1, d.n);
}

// Writes the im2col matrix for images [n0, n0+g): row r = (c*kh+ky)*kw+kx,
// column g_local*ho*wo + y*wo + x. Out-of-bounds taps are zero.
void fill_col(const ConvDims& d, const float* in, int64_t n0, int64_t g, float* col) {
    int64_t map = d.ho * d.wo;
    int64_t cols = g * map;
    for (int64_t gi = 0; gi < g; ++gi) {
        const float* img = in + (n0 + gi) * d.cin * d.h * d.w;
        for (int64_t c = 0; c < d.cin; ++c) {
            const float* plane = img + c * d.h * d.w;
            for (int64_t ky = 0; ky < d.kh; ++ky) {
                for (int64_t kx = 0; kx < d.kw; ++kx) {
                    int64_t r = (c * d.kh + ky) * d.kw + kx;
                    float* dst_base = col + r * cols + gi * map;
                    int64_t x0 = std::max<int64_t>(0, d.pl - kx);
                    int64_t x1 = std::min(d.wo, d.w - kx + d.pl);
                    for (int64_t y = 0; y < d.ho; ++y) {
                        float* dst = dst_base + y * d.wo;
                        int64_t sy = y + ky - d.pt;
                        if (sy < 0 || sy >= d.h || x0 >= x1) {
                            std::memset(dst, 0, static_cast<size_t>(d.wo) * sizeof(float));
                            continue;
                        }
                        if (x0 > 0) std::memset(dst, 0, static_cast<size_t>(x0) * sizeof(float));
                        std::memcpy(dst + x0, plane + sy * d.w + x0 + kx - d.pl,
                                    static_cast<size_t>(x1 - x0) * sizeof(float));
                        if (x1 < d.wo)
                            std::memset(dst + x1, 0, static_cast<size_t>(d.wo - x1) * sizeof(float));
                    }
                }
            }
        }
    }
}

// Adjoint of fill_col: accumulates dcol back into the input gradient.
void fold_col(const ConvDims& d, const float* dcol, int64_t n0, int64_t g, float* din) {
    int64_t map = d.ho * d.wo;
    int64_t cols = g * map;
    for (int64_t gi = 0; gi < g; ++gi) {
        float* img = din + (n0 + gi) * d.cin * d.h * d.w;
        for (int64_t c = 0; c < d.cin; ++c) {
            float* plane = img + c * d.h * d.w;
            for (int64_t ky = 0; ky < d.kh; ++ky) {
                for (int64_t kx = 0; kx < d.kw; ++kx) {
                    int64_t r = (c * d.kh + ky) * d.kw + kx;
                    const float* src_base = dcol + r * cols + gi * map;
                    int64_t x0 = std::max<int64_t>(0, d.pl - kx);
                    int64_t x1 = std::min(d.wo, d.w - kx + d.pl);
                    for (int64_t y = 0; y < d.ho; ++y) {
                        int64_t sy = y + ky - d.pt;
                        if (sy < 0 || sy >= d.h || x0 >= x1) continue;
                        const float* src = src_base + y * d.wo;
                        float* dst = plane + sy * d.w + kx - d.pl;
                        for (int64_t x = x0; x < x1; ++x) dst[x] += src[x];
                    }
                }
            }
        }
    }
}

thread_local std::vector<float> tl_col, tl_chunk, tl_dcol;

} // namespace

Tensor conv2d(const Tensor& input, const Tensor& weight,
              const std::vector<float>* bias, Padding padding) {
    ConvDims d = conv_dims(input, weight, padding);
    if (bias && static_cast<int64_t>(bias->size()) != d.cout)
        throw ShapeError("conv2d bias length " + std::to_string(bias->size()) +
                         " vs Cout " + std::to_string(d.cout));
    Tensor out({d.n, d.cout, d.ho, d.wo});
    int64_t map = d.ho * d.wo;
    int64_t g_max = chunk_images(d);
    tl_col.resize(static_cast<size_t>(d.kdim * g_max * map));
    tl_chunk.resize(static_cast<size_t>(d.cout * g_max * map));

    for (int64_t n0 = 0; n0 < d.n; n0 += g_max) {
        int64_t g = std::min(g_max, d.n - n0);
        int64_t cols = g * map;
        fill_col(d, input.data(), n0, g, tl_col.data());
        gemm(false, false, d.cout, cols, d.kdim, 1.0f,
             weight.data(), d.kdim, tl_col.data(), cols, 0.0f, tl_chunk.data(), cols);
        for (int64_t co = 0; co < d.cout; ++co) {
            float add = bias ? (*bias)[static_cast<size_t>(co)] : 0.0f;
            for (int64_t gi = 0; gi < g; ++gi) {
                const float* src = tl_chunk.data() + co * cols + gi * map;
                float* dst = out.data() + ((n0 + gi) * d.cout + co) * map;
                if (add == 0.0f) {
                    std::memcpy(dst, src, static_cast<size_t>(map) * sizeof(float));
                } else {
                    for (int64_t p = 0; p < map; ++p) dst[p] = src[p] + add;
                }
            }
        }
    }
    return out;
}

void conv2d_backward(const Tensor& input, const Tensor& weight, Padding padding,
                     const Tensor& grad_out, Tensor* grad_input,
                     Tensor* grad_weight, std::vector<float>* grad_bias) {
    ConvDims d = conv_dims(input, weight, padding);
    if (grad_out.rank() != 4 || grad_out.dim(0) != d.n || grad_out.dim(1) != d.cout ||
        grad_out.dim(2) != d.ho || grad_out.dim(3) != d.wo)
        throw ShapeError("conv2d_backward grad_out shape " + shape_str(grad_out.shape()));

    int64_t map = d.ho * d.wo;
    int64_t g_max = chunk_images(d);
    tl_col.resize(static_cast<size_t>(d.kdim * g_max * map));
    tl_chunk.resize(static_cast<size_t>(d.cout * g_max * map));
    if (grad_input) {
        *grad_input = Tensor(input.shape());
        tl_dcol.resize(static_cast<size_t>(d.kdim * g_max * map));
    }
    if (grad_weight) *grad_weight = Tensor(weight.shape());

    if (grad_bias) {
        grad_bias->assign(static_cast<size_t>(d.cout), 0.0f);
        for (int64_t co = 0; co < d.cout; ++co) {
            double acc = 0.0;
            for (int64_t n = 0; n < d.n; ++n) {
                const float* src = grad_out.data() + (n * d.cout + co) * map;
                for (int64_t p = 0; p < map; ++p) acc += src[p];
            }
            (*grad_bias)[static_cast<size_t>(co)] = static_cast<float>(acc);
        }
    }

    bool first = true;
    for (int64_t n0 = 0; n0 < d.n; n0 += g_max) {
        int64_t g = std::min(g_max, d.n - n0);
        int64_t cols = g * map;
        // Gather grad_out[n0:n0+g] into a [cout, cols] matrix.
        for (int64_t co = 0; co < d.cout; ++co)
            for (int64_t gi = 0; gi < g; ++gi)
                std::memcpy(tl_chunk.data() + co * cols + gi * map,
                            grad_out.data() + ((n0 + gi) * d.cout + co) * map,
                            static_cast<size_t>(map) * sizeof(float));
        if (grad_weight) {
            fill_col(d, input.data(), n0, g, tl_col.data());
            gemm(false, true, d.cout, d.kdim, cols, 1.0f,
                 tl_chunk.data(), cols, tl_col.data(), cols,
                 first ? 0.0f : 1.0f, grad_weight->data(), d.kdim);
        }
        if (grad_input) {
            gemm(true, false, d.kdim, cols, d.cout, 1.0f,
                 weight.data(), d.kdim, tl_chunk.data(), cols, 0.0f, tl_dcol.data(), cols);
            fold_col(d, tl_dcol.data(), n0, g, grad_input->data());
        }
        first = false;
    }
}

MaxPoolOut maxpool2d(const Tensor& input, int k) {
    if (k <= 0) throw ArgumentError("maxpool2d k must be positive, got " + std::to_string(k));
    if (input.rank() != 4) throw ShapeError("maxpool2d expects rank 4, got " + shape_str(input.shape()));
    int64_t n = input.dim(0), c = input.dim(1), h = input.dim(2), w = input.dim(3);
    int64_t ho = h / k, wo = w / k;
    MaxPoolOut res{Tensor({n, c, ho, wo}), {}};
    res.argmax.resize(static_cast<size_t>(n * c * ho * wo));
    const float* in = input.data();
    float* out = res.out.data();
    int64_t oi = 0;
    for (int64_t ni = 0; ni < n; ++ni) {
        for (int64_t ci = 0; ci < c; ++ci) {
            const float* plane = in + (ni * c + ci) * h * w;
            int64_t plane_off = (ni * c + ci) * h * w;
            for (int64_t oy = 0; oy < ho; ++oy) {
                for (int64_t ox = 0; ox < wo; ++ox, ++oi) {
                    int64_t best_idx = oy * k * w + ox * k;
                    float best = plane[best_idx];
                    for (int64_t ky = 0; ky < k; ++ky) {
                        for (int64_t kx = 0; kx < k; ++kx) {
                            int64_t idx = (oy * k + ky) * w + ox * k + kx;
                            if (plane[idx] > best) {
                                best = plane[idx];
                                best_idx = idx;
                            }
                        }
                    }
                    out[oi] = best;
                    res.argmax[static_cast<size_t>(oi)] =
                        static_cast<int32_t>(plane_off + best_idx);
                }
            }
        }
    }
    return res;
}

Tensor maxpool2d_backward(const std::vector<int64_t>& input_shape,
                          const std::vector<int32_t>& argmax, const Tensor& grad_out) {
    if (static_cast<int64_t>(argmax.size()) != grad_out.numel())
        throw ShapeError("maxpool2d_backward argmax/grad size mismatch");
    Tensor grad_input(input_shape);
    float* gi = grad_input.data();
    const float* go = grad_out.data();
    for (int64_t i = 0; i < grad_out.numel(); ++i)
        gi[argmax[static_cast<size_t>(i)]] += go[i];
    return grad_input;
}

Tensor batchnorm2d(const Tensor& input, BatchNormState& state, bool training,
                   BatchNormCache* cache) {
    if (input.rank() != 4) throw ShapeError("batchnorm2d expects rank 4, got " + shape_str(input.shape()));
    int64_t n = input.dim(0), c = input.dim(1), hw = input.dim(2) * input.dim(3);
    if (c != state.channels())
        throw ShapeError("batchnorm2d channels " + std::to_string(c) + " vs state " +
                         std::to_string(state.channels()));
    Tensor out(input.shape());
    const float* in = input.data();
    float* o = out.data();

    if (!training) {
        for (int64_t ci = 0; ci < c; ++ci) {
            float gain = state.scale[static_cast<size_t>(ci)] /
                         std::sqrt(state.running_var[static_cast<size_t>(ci)] + state.eps);
            float shift = state.bias[static_cast<size_t>(ci)] -
                          state.running_mean[static_cast<size_t>(ci)] * gain;
            for (int64_t ni = 0; ni < n; ++ni) {
                const float* src = in + (ni * c + ci) * hw;
                float* dst = o + (ni * c + ci) * hw;
                for (int64_t p = 0; p < hw; ++p) dst[p] = src[p] * gain + shift;
            }
        }
        return out;
    }

    int64_t m = n * hw;
    if (m < 2) throw ShapeError("batchnorm2d training needs N*H*W >= 2, got " + std::to_string(m));
    if (cache) {
        cache->mean.resize(static_cast<size_t>(c));
        cache->inv_std.resize(static_cast<size_t>(c));
    }
    for (int64_t ci = 0; ci < c; ++ci) {
        // Eight-lane double accumulation: fixed slot count keeps the result
        // identical however many threads the surrounding code uses.
        double s[8] = {}, s2[8] = {};
        for (int64_t ni = 0; ni < n; ++ni) {
            const float* src = in + (ni * c + ci) * hw;
            int64_t p = 0;
            for (; p + 8 <= hw; p += 8) {
                for (int j = 0; j < 8; ++j) {
                    double v = src[p + j];
                    s[j] += v;
                    s2[j] += v * v;
                }
            }
            for (; p < hw; ++p) {
                double v = src[p];
                s[0] += v;
                s2[0] += v * v;
            }
        }
        double sum = 0, sum2 = 0;
        for (int j = 0; j < 8; ++j) { sum += s[j]; sum2 += s2[j]; }
        double mean = sum / static_cast<double>(m);
        double var = sum2 / static_cast<double>(m) - mean * mean;
        if (var < 0) var = 0;  // guard against rounding on constant inputs
        float inv_std = static_cast<float>(1.0 / std::sqrt(var + static_cast<double>(state.eps)));
        if (cache) {
            cache->mean[static_cast<size_t>(ci)] = static_cast<float>(mean);
            cache->inv_std[static_cast<size_t>(ci)] = inv_std;
        }
        float gain = state.scale[static_cast<size_t>(ci)] * inv_std;
        float shift = state.bias[static_cast<size_t>(ci)] - static_cast<float>(mean) * gain;
        for (int64_t ni = 0; ni < n; ++ni) {
            const float* src = in + (ni * c + ci) * hw;
            float* dst = o + (ni * c + ci) * hw;
            for (int64_t p = 0; p < hw; ++p) dst[p] = src[p] * gain + shift;
        }
        // Running stats blend; the variance uses the unbiased estimator, as
        // the reference framework does for its running buffers.
        double unbiased = var * static_cast<double>(m) / static_cast<double>(m - 1);
        float r = state.retention;
        state.running_mean[static_cast<size_t>(ci)] =
            r * state.running_mean[static_cast<size_t>(ci)] + (1.0f - r) * static_cast<float>(mean);
        state.running_var[static_cast<size_t>(ci)] =
            r * state.running_var[static_cast<size_t>(ci)] + (1.0f - r) * static_cast<float>(unbiased);
    }
    return out;
}

void batchnorm2d_backward(const Tensor& input, const BatchNormState& state,
                          const BatchNormCache& cache, const Tensor& grad_out,
                          Tensor* grad_input, std::vector<float>* grad_bias) {
    int64_t n = input.dim(0), c = input.dim(1), hw = input.dim(2) * input.dim(3);
    if (!input.same_shape(grad_out))
        throw ShapeError("batchnorm2d_backward shape mismatch");
    int64_t m = n * hw;
    if (grad_input) *grad_input = Tensor(input.shape());
    if (grad_bias) grad_bias->assign(static_cast<size_t>(c), 0.0f);

    const float* x = input.data();
    const float* dy = grad_out.data();
    for (int64_t ci = 0; ci < c; ++ci) {
        float mean = cache.mean[static_cast<size_t>(ci)];
        float inv_std = cache.inv_std[static_cast<size_t>(ci)];
        double s1l[8] = {}, s2l[8] = {};
        for (int64_t ni = 0; ni < n; ++ni) {
            const float* xs = x + (ni * c + ci) * hw;
            const float* ds = dy + (ni * c + ci) * hw;
            int64_t p = 0;
            for (; p + 8 <= hw; p += 8) {
                for (int j = 0; j < 8; ++j) {
                    double g = ds[p + j];
                    double xh = (xs[p + j] - mean) * inv_std;
                    s1l[j] += g;
                    s2l[j] += g * xh;
                }
            }
            for (; p < hw; ++p) {
                double g = ds[p];
                double xh = (xs[p] - mean) * inv_std;
                s1l[0] += g;
                s2l[0] += g * xh;
            }
        }
        double s1 = 0, s2 = 0;
        for (int j = 0; j < 8; ++j) { s1 += s1l[j]; s2 += s2l[j]; }
        if (grad_bias) (*grad_bias)[static_cast<size_t>(ci)] = static_cast<float>(s1);
        if (grad_input) {
            float gain = state.scale[static_cast<size_t>(ci)] * inv_std;
            float m1 = static_cast<float>(s1 / static_cast<double>(m));
            float m2 = static_cast<float>(s2 / static_cast<double>(m));
            float* gi = grad_input->data();
            for (int64_t ni = 0; ni < n; ++ni) {
                const float* xs = x + (ni * c + ci) * hw;
                const float* ds = dy + (ni * c + ci) * hw;
                float* gd = gi + (ni * c + ci) * hw;
                for (int64_t p = 0; p < hw; ++p) {
                    float xh = (xs[p] - mean) * inv_std;
                    gd[p] = gain * (ds[p] - m1 - xh * m2);
                }
            }
        }
    }
}

Tensor gelu(const Tensor& input, Tensor* phi_cache) {
    Tensor out(input.shape());
    Tensor local_phi;
    Tensor& phi = phi_cache ? *phi_cache : local_phi;
    phi = Tensor(input.shape());
    gelu_forward_vec(input.data(), phi.data(), out.data(), input.numel());
    return out;
}

Tensor gelu_backward(const Tensor& input, const Tensor& phi_cache,
                     const Tensor& grad_out) {
    if (!input.same_shape(phi_cache) || !input.same_shape(grad_out))
        throw ShapeError("gelu_backward shape mismatch");
    Tensor grad_input(input.shape());
    gelu_backward_vec(input.data(), phi_cache.data(), grad_out.data(),
                      grad_input.data(), input.numel());
    return grad_input;
}

Tensor linear(const Tensor& input, const Tensor& weight) {
    if (input.rank() != 2 || weight.rank() != 2 || input.dim(1) != weight.dim(1))
        throw ShapeError("linear shapes " + shape_str(input.shape()) + " and " +
                         shape_str(weight.shape()));
    int64_t n = input.dim(0), k = weight.dim(0), f = input.dim(1);
    Tensor out({n, k});
    gemm(false, true, n, k, f, 1.0f, input.data(), f, weight.data(), f,
         0.0f, out.data(), k);
    return out;
}

void linear_backward(const Tensor& input, const Tensor& weight,
                     const Tensor& grad_out, Tensor* grad_input, Tensor* grad_weight) {
    int64_t n = input.dim(0), k = weight.dim(0), f = input.dim(1);
    if (grad_out.rank() != 2 || grad_out.dim(0) != n || grad_out.dim(1) != k)
        throw ShapeError("linear_backward grad_out shape " + shape_str(grad_out.shape()));
    if (grad_input) {
        *grad_input = Tensor({n, f});
        gemm(false, false, n, f, k, 1.0f, grad_out.data(), k, weight.data(), f,
             0.0f, grad_input->data(), f);
    }
    if (grad_weight) {
        *grad_weight = Tensor({k, f});
        gemm(true, false, k, f, n, 1.0f, grad_out.data(), k, input.data(), f,
             0.0f, grad_weight->data(), f);
    }
}

namespace {

inline int64_t reflect_index(int64_t i, int64_t extent) {
    if (i < 0) return -i;
    if (i >= extent) return 2 * extent - 2 - i;
    return i;
}

} // namespace

Tensor reflect_pad2d(const Tensor& input, int p) {
    if (input.rank() != 4) throw ShapeError("reflect_pad2d expects rank 4");
    int64_t n = input.dim(0), c = input.dim(1), h = input.dim(2), w = input.dim(3);
    if (p < 0 || p >= std::min(h, w))
        throw ArgumentError("reflect_pad2d padding " + std::to_string(p) +
                            " out of range for " + shape_str(input.shape()));
    if (p == 0) return input;
    int64_t hp = h + 2 * p, wp = w + 2 * p;
    Tensor out({n, c, hp, wp});
    for (int64_t plane = 0; plane < n * c; ++plane) {
        const float* src = input.data() + plane * h * w;
        float* dst = out.data() + plane * hp * wp;
        for (int64_t y = 0; y < hp; ++y) {
            int64_t sy = reflect_index(y - p, h);
            for (int64_t x = 0; x < wp; ++x)
                dst[y * wp + x] = src[sy * w + reflect_index(x - p, w)];
        }
    }
    return out;
}

Tensor reflect_pad2d_backward(const std::vector<int64_t>& input_shape,
                              const Tensor& grad_out, int p) {
    Tensor grad_input(input_shape);
    int64_t n = input_shape[0], c = input_shape[1], h = input_shape[2], w = input_shape[3];
    int64_t hp = h + 2 * p, wp = w + 2 * p;
    if (grad_out.rank() != 4 || grad_out.dim(2) != hp || grad_out.dim(3) != wp ||
        grad_out.dim(0) != n || grad_out.dim(1) != c)
        throw ShapeError("reflect_pad2d_backward grad shape " + shape_str(grad_out.shape()));
    for (int64_t plane = 0; plane < n * c; ++plane) {
        float* dst = grad_input.data() + plane * h * w;
        const float* src = grad_out.data() + plane * hp * wp;
        for (int64_t y = 0; y < hp; ++y) {
            int64_t sy = reflect_index(y - p, h);
            for (int64_t x = 0; x < wp; ++x)
                dst[sy * w + reflect_index(x - p, w)] += src[y * wp + x];
        }
    }
    return grad_input;
}

SoftmaxCeOut softmax_crossentropy(const Tensor& logits,
                                  const std::vector<int32_t>& labels,
                                  float smoothing) {
    if (logits.rank() != 2) throw ShapeError("softmax_crossentropy expects [N,K] logits");
    int64_t n = logits.dim(0), k = logits.dim(1);
    if (static_cast<int64_t>(labels.size()) != n)
        throw ShapeError("labels length " + std::to_string(labels.size()) + " vs N " +
                         std::to_string(n));
    if (smoothing < 0.0f || smoothing >= 1.0f)
        throw ArgumentError("smoothing must be in [0,1), got " + std::to_string(smoothing));

    SoftmaxCeOut res;
    res.grad = Tensor({n, k});
    double off_target = static_cast<double>(smoothing) / static_cast<double>(k);
    double loss = 0.0;
    for (int64_t i = 0; i < n; ++i) {
        int32_t label = labels[static_cast<size_t>(i)];
        if (label < 0 || label >= k)
            throw ArgumentError("label " + std::to_string(label) + " out of range [0," +
                                std::to_string(k) + ")");
        const float* row = logits.data() + i * k;
        float* grad = res.grad.data() + i * k;
        double mx = row[0];
        for (int64_t j = 1; j < k; ++j) mx = std::max(mx, static_cast<double>(row[j]));
        double denom = 0.0;
        for (int64_t j = 0; j < k; ++j) denom += std::exp(static_cast<double>(row[j]) - mx);
        double log_denom = std::log(denom);
        double row_loss = 0.0;
        for (int64_t j = 0; j < k; ++j) {
            double z = static_cast<double>(row[j]) - mx;
            double logp = z - log_denom;
            double target = off_target + (j == label ? 1.0 - static_cast<double>(smoothing) : 0.0);
            row_loss -= target * logp;
            grad[j] = static_cast<float>(std::exp(z) / denom - target);
        }
        loss += row_loss;
    }
    res.loss = loss;
    return res;
}

} // namespace airbench
