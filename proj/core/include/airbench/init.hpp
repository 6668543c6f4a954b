#pragma once

#include <cstdint>
#include <vector>

#include "airbench/dataset.hpp"
#include "airbench/net.hpp"
#include "airbench/tensor.hpp"

namespace airbench {

struct WhitenConfig {
    int patch_h = 2;
    int patch_w = 2;
    int64_t sample_count = 5000;
    float eps = 5e-4f;
};

// All stride-1 sliding ph x pw patches of every image: [M*(H-ph+1)*(W-pw+1),
// C, ph, pw].
Tensor extract_patches(const Tensor& images, int ph, int pw);

struct WhitenFilters {
    std::vector<float> eigenvalues; // descending, non-negative
    Tensor filters;                 // [D, C, ph, pw], row k = eigvec_k / sqrt(eigval_k + eps)
};

// Eigendecomposition of the uncentered patch covariance (X^T X / P). The sign
// of each eigenvector is fixed by making its largest-magnitude component
// non-negative.
WhitenFilters whitening_filters(const Tensor& patches, float eps);

// Sets the whiten conv of the net from the first cfg.sample_count normalized
// training images: filters 0..D-1 are the whitening filters, D..2D-1 their
// negation, bias zero, weight frozen.
void init_whiten_layer(Net& net, const Dataset& data, const WhitenConfig& cfg,
                       const NormalizeParams& norm = kCifarNorm);

// Identity-prefix initialization: rows m < min(Cin, Cout) become exact dirac
// filters (1 at the center of channel m, 0 elsewhere); later rows keep their
// existing values.
void dirac_init(Tensor& weight);

// Symmetric eigendecomposition by cyclic Jacobi rotations. a is row-major
// d x d and is destroyed; returns eigenvalues (unsorted) with eigenvectors in
// the columns of v.
void jacobi_eigen(std::vector<double>& a, std::vector<double>& v, int d);

} // namespace airbench
