#pragma once

// Central finite-difference gradient checking shared by the kernel tests and
// the acceptance gradient suite.

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "airbench/rng.hpp"
#include "airbench/tensor.hpp"

namespace gradcheck {

// Normwise relative difference: ||a-b|| / (||a|| + ||b|| + tiny).
inline double norm_rel_err(const float* a, const float* b, int64_t n) {
    double na = 0, nb = 0, nd = 0;
    for (int64_t i = 0; i < n; ++i) {
        double d = static_cast<double>(a[i]) - b[i];
        nd += d * d;
        na += static_cast<double>(a[i]) * a[i];
        nb += static_cast<double>(b[i]) * b[i];
    }
    return std::sqrt(nd) / (std::sqrt(na) + std::sqrt(nb) + 1e-12);
}

// Central differences of a scalar function with respect to the vector x,
// perturbing in place.
inline std::vector<float> fd_grad(float* x, int64_t n,
                                  const std::function<double()>& fn, float h = 1e-2f) {
    std::vector<float> g(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i) {
        float orig = x[i];
        x[i] = orig + h;
        double fp = fn();
        x[i] = orig - h;
        double fm = fn();
        x[i] = orig;
        g[static_cast<size_t>(i)] = static_cast<float>((fp - fm) / (2.0 * h));
    }
    return g;
}

inline airbench::Tensor random_tensor(std::vector<int64_t> shape, airbench::RngStream& rng,
                                      float lo = -1.0f, float hi = 1.0f) {
    airbench::Tensor t(std::move(shape));
    for (int64_t i = 0; i < t.numel(); ++i) t.data()[i] = rng.uniform(lo, hi);
    return t;
}

// Scalar projection loss sum(out * r): its upstream gradient is r itself.
inline double weighted_sum(const airbench::Tensor& out, const airbench::Tensor& r) {
    double s = 0;
    for (int64_t i = 0; i < out.numel(); ++i)
        s += static_cast<double>(out.data()[i]) * r.data()[i];
    return s;
}

} // namespace gradcheck
