#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <vector>

namespace plab {

using cplx = std::complex<double>;

namespace detail {
void* fft_alloc(std::size_t bytes);
void fft_free(void* p) noexcept;
}  // namespace detail

/// Allocator giving the SIMD alignment the FFT backend plans for.
template <class T>
struct FftAllocator {
    using value_type = T;
    FftAllocator() = default;
    template <class U>
    FftAllocator(const FftAllocator<U>&) noexcept {}
    T* allocate(std::size_t n) { return static_cast<T*>(detail::fft_alloc(n * sizeof(T))); }
    void deallocate(T* p, std::size_t) noexcept { detail::fft_free(p); }
    template <class U>
    bool operator==(const FftAllocator<U>&) const noexcept { return true; }
};

using ComplexBuffer = std::vector<cplx, FftAllocator<cplx>>;

/// In-place 1D complex DFT of fixed length. Unnormalized in both directions:
/// backward(forward(x)) == n * x. Plans are built with estimate-only planning
/// so repeated runs execute the same algorithm.
class FftPlan {
public:
    explicit FftPlan(std::size_t n);
    ~FftPlan();
    FftPlan(const FftPlan&) = delete;
    FftPlan& operator=(const FftPlan&) = delete;
    FftPlan(FftPlan&&) noexcept;
    FftPlan& operator=(FftPlan&&) noexcept;

    std::size_t size() const noexcept;
    /// X_k = sum_j x_j exp(-2 pi i j k / n)
    void forward(cplx* data) const;
    /// x_j = sum_k X_k exp(+2 pi i j k / n)
    void backward(cplx* data) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Unitary (1/sqrt(n)) transform pair, for callers that want an isometry.
ComplexBuffer unitary_dft(const ComplexBuffer& x);
ComplexBuffer unitary_idft(const ComplexBuffer& x);

}  // namespace plab
