#pragma once

#include <cstdint>

namespace airbench {

// Vectorized elementwise transforms for the GELU/softmax hot paths. All take
// input and output arrays of length n (in-place allowed). Accuracy: erf within
// ~5e-7 absolute of the correctly rounded value, exp within a few ulp.

void vec_erf(const float* x, float* y, int64_t n);
void vec_exp(const float* x, float* y, int64_t n);
// Standard normal CDF Φ(x) = (1 + erf(x/√2)) / 2.
void vec_norm_cdf(const float* x, float* y, int64_t n);

// Fused GELU passes. Forward writes both Φ(x) (kept for backward) and
// y = x·Φ(x). Backward computes dx = dy·(Φ(x) + x·φ(x)).
void gelu_forward_vec(const float* x, float* phi, float* y, int64_t n);
void gelu_backward_vec(const float* x, const float* phi, const float* dy,
                       float* dx, int64_t n);

} // namespace airbench
