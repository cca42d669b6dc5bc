// Compiled with -mavx2 -mfma. Only reached through the dispatcher after a
// CPU feature check.

#include <immintrin.h>

#include "plab/simd.hpp"

namespace plab::simd {
namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// Two complex numbers per register: [re0, im0, re1, im1].
inline __m256d cmul(__m256d a, __m256d b) {
    const __m256d b_re = _mm256_movedup_pd(b);
    const __m256d b_im = _mm256_permute_pd(b, 0xF);
    const __m256d a_sw = _mm256_permute_pd(a, 0x5);
    return _mm256_fmaddsub_pd(a, b_re, _mm256_mul_pd(a_sw, b_im));
}

void cmul_inplace(cplx* x, const cplx* phase, std::size_t n) {
    auto* xd = reinterpret_cast<double*>(x);
    const auto* pd = reinterpret_cast<const double*>(phase);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d a = _mm256_loadu_pd(xd + 2 * i);
        const __m256d b = _mm256_loadu_pd(pd + 2 * i);
        _mm256_storeu_pd(xd + 2 * i, cmul(a, b));
    }
    for (; i < n; ++i) {
        const double ar = x[i].real(), ai = x[i].imag();
        const double br = phase[i].real(), bi = phase[i].imag();
        x[i] = {ar * br - ai * bi, ai * br + ar * bi};
    }
}

void mix5(const std::array<cplx*, 5>& f, const cplx* m, std::size_t n) {
    __m256d mr[25], mi[25];
    for (int e = 0; e < 25; ++e) {
        mr[e] = _mm256_set1_pd(m[e].real());
        mi[e] = _mm256_set1_pd(m[e].imag());
    }
    double* fd[5];
    for (int c = 0; c < 5; ++c) fd[c] = reinterpret_cast<double*>(f[c]);

    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        __m256d in[5], sw[5];
        for (int c = 0; c < 5; ++c) {
            in[c] = _mm256_loadu_pd(fd[c] + 2 * i);
            sw[c] = _mm256_permute_pd(in[c], 0x5);
        }
        __m256d out[5];
        for (int r = 0; r < 5; ++r) {
            __m256d acc_re = _mm256_mul_pd(in[0], mr[5 * r]);
            __m256d acc_im = _mm256_mul_pd(sw[0], mi[5 * r]);
            for (int c = 1; c < 5; ++c) {
                acc_re = _mm256_fmadd_pd(in[c], mr[5 * r + c], acc_re);
                acc_im = _mm256_fmadd_pd(sw[c], mi[5 * r + c], acc_im);
            }
            out[r] = _mm256_addsub_pd(acc_re, acc_im);
        }
        for (int r = 0; r < 5; ++r) _mm256_storeu_pd(fd[r] + 2 * i, out[r]);
    }
    for (; i < n; ++i) {
        const cplx in[5] = {f[0][i], f[1][i], f[2][i], f[3][i], f[4][i]};
        for (int r = 0; r < 5; ++r) {
            double re = 0.0, im = 0.0;
            for (int c = 0; c < 5; ++c) {
                const cplx a = m[5 * r + c];
                re += a.real() * in[c].real() - a.imag() * in[c].imag();
                im += a.real() * in[c].imag() + a.imag() * in[c].real();
            }
            f[r][i] = {re, im};
        }
    }
}

double norm_sq(const cplx* x, std::size_t n) {
    const auto* xd = reinterpret_cast<const double*>(x);
    const std::size_t len = 2 * n;
    __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= len; i += 8) {
        const __m256d a = _mm256_loadu_pd(xd + i);
        const __m256d b = _mm256_loadu_pd(xd + i + 4);
        acc0 = _mm256_fmadd_pd(a, a, acc0);
        acc1 = _mm256_fmadd_pd(b, b, acc1);
    }
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < len; ++i) s += xd[i] * xd[i];
    return s;
}

double weighted_norm_sq(const cplx* x, const double* w, std::size_t n) {
    const auto* xd = reinterpret_cast<const double*>(x);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d a = _mm256_loadu_pd(xd + 2 * i);
        const __m128d w2 = _mm_loadu_pd(w + i);
        const __m256d wd = _mm256_set_m128d(_mm_unpackhi_pd(w2, w2), _mm_unpacklo_pd(w2, w2));
        acc = _mm256_fmadd_pd(_mm256_mul_pd(a, a), wd, acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i) s += w[i] * (x[i].real() * x[i].real() + x[i].imag() * x[i].imag());
    return s;
}

double dot(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) y[i] += alpha * x[i];
}

constexpr KernelTable kAvx2{Backend::Avx2, cmul_inplace, mix5, norm_sq, weighted_norm_sq, dot, axpy};

}  // namespace

const KernelTable* avx2_kernels_unchecked() noexcept { return &kAvx2; }

}  // namespace plab::simd
