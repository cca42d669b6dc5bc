#pragma once

// Data-parallel inner loops used by the propagator and the Lanczos solver.
//
// Every kernel has a scalar reference implementation. Vector variants are
// compiled into separate translation units with their own target flags and
// picked at runtime from CPU feature bits. The backend can be pinned with
// POLARITON_LAB_SIMD=scalar|avx2 (useful for equivalence testing and for
// bit-identical reruns across machines).
//
// Reductions accumulate in a fixed lane order, so results are deterministic
// for a given backend but may differ from the scalar path in the last bits.

#include <array>
#include <complex>
#include <cstddef>
#include <string_view>

namespace plab::simd {

using cplx = std::complex<double>;

enum class Backend { Scalar, Avx2 };

std::string_view name(Backend b) noexcept;

struct KernelTable {
    Backend backend;

    /// x[i] *= phase[i]
    void (*cmul_inplace)(cplx* x, const cplx* phase, std::size_t n);
    /// Pointwise 5-vector update: (f_0..f_4)[i] <- M (f_0..f_4)[i], M row-major 5x5.
    void (*mix5)(const std::array<cplx*, 5>& fields, const cplx* matrix, std::size_t n);
    /// sum |x[i]|^2
    double (*norm_sq)(const cplx* x, std::size_t n);
    /// sum w[i] |x[i]|^2
    double (*weighted_norm_sq)(const cplx* x, const double* w, std::size_t n);
    /// sum a[i] b[i]
    double (*dot)(const double* a, const double* b, std::size_t n);
    /// y[i] += alpha x[i]
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
};

const KernelTable& scalar_kernels() noexcept;
/// nullptr when the variant was not compiled or the CPU lacks the features.
const KernelTable* avx2_kernels() noexcept;

bool cpu_supports_avx2() noexcept;

/// Active table: env override, else best supported.
const KernelTable& kernels() noexcept;

/// Pin the active backend; returns false if unsupported here.
bool set_backend(Backend b) noexcept;

}  // namespace plab::simd
