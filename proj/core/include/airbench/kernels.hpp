#pragma once

#include <cstdint>
#include <vector>

#include "airbench/tensor.hpp"

namespace airbench {

enum class Padding { Same, None };

// --- convolution (stride 1, cross-correlation, im2col + GEMM) -------------
// 'same' keeps H,W (zero padding; even kernels pad the extra row/col at the
// bottom/right); 'none' is a valid convolution.

Tensor conv2d(const Tensor& input, const Tensor& weight,
              const std::vector<float>* bias, Padding padding);

// Any of the grad outputs may be null to skip that computation. grad_weight
// and grad_bias are overwritten (not accumulated into).
void conv2d_backward(const Tensor& input, const Tensor& weight, Padding padding,
                     const Tensor& grad_out, Tensor* grad_input,
                     Tensor* grad_weight, std::vector<float>* grad_bias);

// --- max pooling ----------------------------------------------------------
// Output extent is floor(H/k); trailing rows/cols are dropped. argmax holds
// the flat input offset of each window maximum (first occurrence on ties).

struct MaxPoolOut {
    Tensor out;
    std::vector<int32_t> argmax;
};

MaxPoolOut maxpool2d(const Tensor& input, int k);
Tensor maxpool2d_backward(const std::vector<int64_t>& input_shape,
                          const std::vector<int32_t>& argmax, const Tensor& grad_out);

// --- batch normalization --------------------------------------------------

struct BatchNormState {
    std::vector<float> running_mean;
    std::vector<float> running_var;
    std::vector<float> bias;   // learnable
    std::vector<float> scale;  // frozen at 1 (affine scale disabled)
    float retention = 0.6f;
    float eps = 1e-12f;

    explicit BatchNormState(int64_t channels = 0)
        : running_mean(static_cast<size_t>(channels), 0.0f),
          running_var(static_cast<size_t>(channels), 1.0f),
          bias(static_cast<size_t>(channels), 0.0f),
          scale(static_cast<size_t>(channels), 1.0f) {}
    int64_t channels() const { return static_cast<int64_t>(bias.size()); }
};

struct BatchNormCache {
    std::vector<float> mean;     // batch mean per channel
    std::vector<float> inv_std;  // 1/sqrt(batch var + eps) per channel
};

// Training mode normalizes with batch statistics (biased variance, divisor
// N*H*W) and updates running stats: running <- retention*running +
// (1-retention)*batch, where the variance fed to the running update is the
// unbiased one (divisor N*H*W - 1), matching the reference framework.
// Eval mode applies the running-stat affine map. cache may be null in eval.
Tensor batchnorm2d(const Tensor& input, BatchNormState& state, bool training,
                   BatchNormCache* cache);
void batchnorm2d_backward(const Tensor& input, const BatchNormState& state,
                          const BatchNormCache& cache, const Tensor& grad_out,
                          Tensor* grad_input, std::vector<float>* grad_bias);

// --- GELU (exact erf form) ------------------------------------------------
// phi_cache receives Φ(x) for reuse in backward.

Tensor gelu(const Tensor& input, Tensor* phi_cache);
Tensor gelu_backward(const Tensor& input, const Tensor& phi_cache,
                     const Tensor& grad_out);

// --- linear (no bias): out = input @ weight^T -----------------------------

Tensor linear(const Tensor& input, const Tensor& weight);
void linear_backward(const Tensor& input, const Tensor& weight,
                     const Tensor& grad_out, Tensor* grad_input, Tensor* grad_weight);

// --- reflection padding (exclude-edge mirror) -----------------------------

Tensor reflect_pad2d(const Tensor& input, int p);
// Adjoint: folds the padded gradient back onto the source pixels.
Tensor reflect_pad2d_backward(const std::vector<int64_t>& input_shape,
                              const Tensor& grad_out, int p);

// --- softmax cross-entropy with label smoothing, sum reduction ------------

struct SoftmaxCeOut {
    double loss = 0.0;   // summed over the batch
    Tensor grad;         // d loss / d logits (softmax - target), per example
};

SoftmaxCeOut softmax_crossentropy(const Tensor& logits,
                                  const std::vector<int32_t>& labels,
                                  float smoothing);

} // namespace airbench
