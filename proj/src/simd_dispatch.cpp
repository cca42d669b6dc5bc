#include <atomic>
#include <cstdlib>
#include <string>

#include "plab/simd.hpp"

namespace plab::simd {

#if defined(PLAB_HAVE_AVX2)
const KernelTable* avx2_kernels_unchecked() noexcept;
#endif

std::string_view name(Backend b) noexcept {
    switch (b) {
        case Backend::Scalar: return "scalar";
        case Backend::Avx2: return "avx2";
    }
    return "unknown";
}

bool cpu_supports_avx2() noexcept {
#if defined(PLAB_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__)) && (defined(__x86_64__) || defined(__i386__))
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const KernelTable* avx2_kernels() noexcept {
#if defined(PLAB_HAVE_AVX2)
    if (cpu_supports_avx2()) return avx2_kernels_unchecked();
#endif
    return nullptr;
}

namespace {

const KernelTable* initial_table() noexcept {
    if (const char* env = std::getenv("POLARITON_LAB_SIMD")) {
        const std::string v(env);
        if (v == "scalar") return &scalar_kernels();
        if (v == "avx2" && avx2_kernels()) return avx2_kernels();
    }
    if (const auto* t = avx2_kernels()) return t;
    return &scalar_kernels();
}

std::atomic<const KernelTable*>& active() noexcept {
    static std::atomic<const KernelTable*> table{initial_table()};
    return table;
}

}  // namespace

const KernelTable& kernels() noexcept { return *active().load(std::memory_order_acquire); }

bool set_backend(Backend b) noexcept {
    const KernelTable* t = b == Backend::Scalar ? &scalar_kernels() : avx2_kernels();
    if (!t) return false;
    active().store(t, std::memory_order_release);
    return true;
}

}  // namespace plab::simd
