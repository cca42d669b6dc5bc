#include "plab/fourier.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <new>

namespace plab {

namespace detail {

void* fft_alloc(std::size_t bytes) {
    void* p = fftw_malloc(bytes == 0 ? 1 : bytes);
    if (!p) throw std::bad_alloc();
    return p;
}

void fft_free(void* p) noexcept { fftw_free(p); }

}  // namespace detail

namespace {
// The FFTW planner is not thread-safe; execution is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

struct FftPlan::Impl {
    std::size_t n = 0;
    fftw_complex* scratch = nullptr;
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
    int alignment = 0;

    ~Impl() {
        std::lock_guard lock(planner_mutex());
        if (fwd) fftw_destroy_plan(fwd);
        if (bwd) fftw_destroy_plan(bwd);
        if (scratch) fftw_free(scratch);
    }

    void run(fftw_plan plan, cplx* data) const {
        auto* d = reinterpret_cast<fftw_complex*>(data);
        if (fftw_alignment_of(reinterpret_cast<double*>(d)) == alignment) {
            fftw_execute_dft(plan, d, d);
            return;
        }
        // misaligned caller buffer: go through a temporary with plan alignment
        ComplexBuffer tmp(data, data + n);
        auto* t = reinterpret_cast<fftw_complex*>(tmp.data());
        fftw_execute_dft(plan, t, t);
        std::copy(tmp.begin(), tmp.end(), data);
    }
};

FftPlan::FftPlan(std::size_t n) : impl_(std::make_unique<Impl>()) {
    impl_->n = n;
    std::lock_guard lock(planner_mutex());
    impl_->scratch = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
    if (!impl_->scratch) throw std::bad_alloc();
    const int len = static_cast<int>(n);
    impl_->fwd = fftw_plan_dft_1d(len, impl_->scratch, impl_->scratch, FFTW_FORWARD, FFTW_ESTIMATE);
    impl_->bwd = fftw_plan_dft_1d(len, impl_->scratch, impl_->scratch, FFTW_BACKWARD, FFTW_ESTIMATE);
    impl_->alignment = fftw_alignment_of(reinterpret_cast<double*>(impl_->scratch));
}

FftPlan::~FftPlan() = default;
FftPlan::FftPlan(FftPlan&&) noexcept = default;
FftPlan& FftPlan::operator=(FftPlan&&) noexcept = default;

std::size_t FftPlan::size() const noexcept { return impl_->n; }
void FftPlan::forward(cplx* data) const { impl_->run(impl_->fwd, data); }
void FftPlan::backward(cplx* data) const { impl_->run(impl_->bwd, data); }

ComplexBuffer unitary_dft(const ComplexBuffer& x) {
    FftPlan plan(x.size());
    ComplexBuffer y = x;
    plan.forward(y.data());
    const double s = 1.0 / std::sqrt(static_cast<double>(x.size()));
    for (auto& v : y) v *= s;
    return y;
}

ComplexBuffer unitary_idft(const ComplexBuffer& x) {
    FftPlan plan(x.size());
    ComplexBuffer y = x;
    plan.backward(y.data());
    const double s = 1.0 / std::sqrt(static_cast<double>(x.size()));
    for (auto& v : y) v *= s;
    return y;
}

}  // namespace plab
