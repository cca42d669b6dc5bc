#include "plab/simd.hpp"

namespace plab::simd {
namespace {

void cmul_inplace(cplx* x, const cplx* phase, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double ar = x[i].real(), ai = x[i].imag();
        const double br = phase[i].real(), bi = phase[i].imag();
        x[i] = {ar * br - ai * bi, ai * br + ar * bi};
    }
}

void mix5(const std::array<cplx*, 5>& f, const cplx* m, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
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
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i].real() * x[i].real() + x[i].imag() * x[i].imag();
    return s;
}

double weighted_norm_sq(const cplx* x, const double* w, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        s += w[i] * (x[i].real() * x[i].real() + x[i].imag() * x[i].imag());
    return s;
}

double dot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

constexpr KernelTable kScalar{Backend::Scalar, cmul_inplace, mix5, norm_sq, weighted_norm_sq, dot, axpy};

}  // namespace

const KernelTable& scalar_kernels() noexcept { return kScalar; }

}  // namespace plab::simd
