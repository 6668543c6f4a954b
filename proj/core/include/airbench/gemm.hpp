#pragma once

#include <cstdint>

namespace airbench {

// Row-major single-precision GEMM:
//   C = alpha * op(A) @ op(B) + beta * C
// with op(X) = X or X^T per the trans flags. lda/ldb/ldc are the row strides
// of the matrices as stored (i.e. of the untransposed A and B). beta == 0
// never reads C, so C may start uninitialized.
void gemm(bool trans_a, bool trans_b, int64_t m, int64_t n, int64_t k,
          float alpha, const float* a, int64_t lda,
          const float* b, int64_t ldb,
          float beta, float* c, int64_t ldc);

} // namespace airbench
