#include "airbench/gemm.hpp"

#include <algorithm>
#include <cstring>
#include <vector>

#include "airbench/thread_pool.hpp"

#if defined(__AVX512F__)
#include <immintrin.h>
#endif

namespace airbench {

namespace {

// BLIS-style blocking. The microkernel updates an MR x NR tile of C; A is
// packed into MR-interleaved row panels, B into NR-interleaved column panels.
constexpr int64_t MR = 6;
constexpr int64_t NR = 32;
constexpr int64_t MC = 144;   // multiple of MR; A block MC x KC stays in L2
constexpr int64_t KC = 384;
constexpr int64_t NC = 4096;  // multiple of NR

// Packs op(A)[ic:ic+mc, pc:pc+kc] into panels: panel p holds rows
// [p*MR, p*MR+MR), element (r, kk) at p*MR*kc + kk*MR + r. Rows past mc are
// zero so the kernel can always run the full MR height.
void pack_a(bool trans_a, const float* a, int64_t lda,
            int64_t ic, int64_t pc, int64_t mc, int64_t kc, float* ap) {
    for (int64_t p = 0; p < (mc + MR - 1) / MR; ++p) {
        float* dst = ap + p * MR * kc;
        for (int64_t kk = 0; kk < kc; ++kk) {
            for (int64_t r = 0; r < MR; ++r) {
                int64_t i = p * MR + r;
                float v = 0.0f;
                if (i < mc) {
                    v = trans_a ? a[(pc + kk) * lda + (ic + i)]
                                : a[(ic + i) * lda + (pc + kk)];
                }
                dst[kk * MR + r] = v;
            }
        }
    }
}

// Packs op(B)[pc:pc+kc, jc:jc+nc] into panels: panel q holds columns
// [q*NR, q*NR+NR), element (kk, j) at q*kc*NR + kk*NR + j, zero past nc.
void pack_b(bool trans_b, const float* b, int64_t ldb,
            int64_t pc, int64_t jc, int64_t kc, int64_t nc, float* bp) {
    for (int64_t q = 0; q < (nc + NR - 1) / NR; ++q) {
        float* dst = bp + q * kc * NR;
        int64_t j0 = q * NR;
        int64_t jn = std::min(NR, nc - j0);
        for (int64_t kk = 0; kk < kc; ++kk) {
            float* row = dst + kk * NR;
            if (!trans_b) {
                const float* src = b + (pc + kk) * ldb + (jc + j0);
                std::memcpy(row, src, static_cast<size_t>(jn) * sizeof(float));
            } else {
                for (int64_t j = 0; j < jn; ++j)
                    row[j] = b[(jc + j0 + j) * ldb + (pc + kk)];
            }
            for (int64_t j = jn; j < NR; ++j) row[j] = 0.0f;
        }
    }
}

#if defined(__AVX512F__)

void micro_tile(int64_t kc, const float* ap, const float* bp,
                float* c, int64_t ldc, int64_t m_eff, int64_t n_eff,
                float alpha, float beta, bool first) {
    __m512 acc[MR][2];
    for (int64_t r = 0; r < MR; ++r) {
        acc[r][0] = _mm512_setzero_ps();
        acc[r][1] = _mm512_setzero_ps();
    }
    for (int64_t kk = 0; kk < kc; ++kk) {
        __m512 b0 = _mm512_loadu_ps(bp + kk * NR);
        __m512 b1 = _mm512_loadu_ps(bp + kk * NR + 16);
        const float* arow = ap + kk * MR;
        for (int64_t r = 0; r < MR; ++r) {
            __m512 av = _mm512_set1_ps(arow[r]);
            acc[r][0] = _mm512_fmadd_ps(av, b0, acc[r][0]);
            acc[r][1] = _mm512_fmadd_ps(av, b1, acc[r][1]);
        }
    }
    __mmask16 m0 = n_eff >= 16 ? static_cast<__mmask16>(0xFFFF)
                               : static_cast<__mmask16>((1u << n_eff) - 1);
    __mmask16 m1 = n_eff >= 32 ? static_cast<__mmask16>(0xFFFF)
                 : n_eff > 16  ? static_cast<__mmask16>((1u << (n_eff - 16)) - 1)
                               : static_cast<__mmask16>(0);
    __m512 va = _mm512_set1_ps(alpha);
    for (int64_t r = 0; r < m_eff; ++r) {
        float* crow = c + r * ldc;
        __m512 r0 = _mm512_mul_ps(va, acc[r][0]);
        __m512 r1 = _mm512_mul_ps(va, acc[r][1]);
        if (!first) {
            r0 = _mm512_add_ps(r0, _mm512_maskz_loadu_ps(m0, crow));
            r1 = _mm512_add_ps(r1, _mm512_maskz_loadu_ps(m1, crow + 16));
        } else if (beta != 0.0f) {
            __m512 vb = _mm512_set1_ps(beta);
            r0 = _mm512_fmadd_ps(vb, _mm512_maskz_loadu_ps(m0, crow), r0);
            r1 = _mm512_fmadd_ps(vb, _mm512_maskz_loadu_ps(m1, crow + 16), r1);
        }
        _mm512_mask_storeu_ps(crow, m0, r0);
        if (m1) _mm512_mask_storeu_ps(crow + 16, m1, r1);
    }
}

#else

// Generic microkernel; the fixed MR x NR accumulator block lets the compiler
// auto-vectorize for whatever ISA the build targets.
void micro_tile(int64_t kc, const float* ap, const float* bp,
                float* c, int64_t ldc, int64_t m_eff, int64_t n_eff,
                float alpha, float beta, bool first) {
    float acc[MR][NR] = {};
    for (int64_t kk = 0; kk < kc; ++kk) {
        const float* brow = bp + kk * NR;
        const float* arow = ap + kk * MR;
        for (int64_t r = 0; r < MR; ++r) {
            float av = arow[r];
            for (int64_t j = 0; j < NR; ++j) acc[r][j] += av * brow[j];
        }
    }
    for (int64_t r = 0; r < m_eff; ++r) {
        float* crow = c + r * ldc;
        for (int64_t j = 0; j < n_eff; ++j) {
            float v = alpha * acc[r][j];
            if (!first) v += crow[j];
            else if (beta != 0.0f) v += beta * crow[j];
            crow[j] = v;
        }
    }
}

#endif

void scale_c(float beta, int64_t m, int64_t n, float* c, int64_t ldc) {
    for (int64_t i = 0; i < m; ++i) {
        float* row = c + i * ldc;
        if (beta == 0.0f) std::memset(row, 0, static_cast<size_t>(n) * sizeof(float));
        else for (int64_t j = 0; j < n; ++j) row[j] *= beta;
    }
}

} // namespace

void gemm(bool trans_a, bool trans_b, int64_t m, int64_t n, int64_t k,
          float alpha, const float* a, int64_t lda,
          const float* b, int64_t ldb,
          float beta, float* c, int64_t ldc) {
    if (m <= 0 || n <= 0) return;
    if (k <= 0 || alpha == 0.0f) {
        scale_c(beta, m, n, c, ldc);
        return;
    }

    static thread_local std::vector<float> ap_buf, bp_buf;
    ap_buf.resize(static_cast<size_t>((MC + MR) * KC));
    bp_buf.resize(static_cast<size_t>(KC * (NC + NR)));

    ThreadPool& pool = ThreadPool::global();

    for (int64_t jc = 0; jc < n; jc += NC) {
        int64_t nc = std::min(NC, n - jc);
        int64_t n_panels = (nc + NR - 1) / NR;
        for (int64_t pc = 0; pc < k; pc += KC) {
            int64_t kc = std::min(KC, k - pc);
            bool first = (pc == 0);
            pack_b(trans_b, b, ldb, pc, jc, kc, nc, bp_buf.data());
            for (int64_t ic = 0; ic < m; ic += MC) {
                int64_t mc = std::min(MC, m - ic);
                int64_t m_panels = (mc + MR - 1) / MR;
                pack_a(trans_a, a, lda, ic, pc, mc, kc, ap_buf.data());
                // Each slot owns one disjoint MR x NR tile of C, so the
                // result is independent of how slots land on threads.
                pool.run_slots(m_panels * n_panels, [&](int64_t s) {
                    int64_t p = s / n_panels;
                    int64_t q = s % n_panels;
                    micro_tile(kc,
                               ap_buf.data() + p * MR * kc,
                               bp_buf.data() + q * kc * NR,
                               c + (ic + p * MR) * ldc + (jc + q * NR), ldc,
                               std::min(MR, mc - p * MR),
                               std::min(NR, nc - q * NR),
                               alpha, beta, first);
                });
            }
        }
    }
}

} // namespace airbench
