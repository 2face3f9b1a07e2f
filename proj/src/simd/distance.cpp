#include "leakaudit/simd/distance.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace leakaudit::simd {

namespace {

using Kernel = double (*)(const double*, const double*, std::size_t) noexcept;

Kernel kernel_for(Backend b) noexcept {
    switch (b) {
#if defined(LEAKAUDIT_HAVE_AVX2)
        case Backend::Avx2:
            return &squared_l2_avx2;
#endif
#if defined(LEAKAUDIT_HAVE_NEON)
        case Backend::Neon:
            return &squared_l2_neon;
#endif
        default:
            return &squared_l2_scalar;
    }
}

Backend detect() noexcept {
    if (const char* env = std::getenv("LEAKAUDIT_SIMD")) {
        const std::string v(env);
        if (v == "scalar") return Backend::Scalar;
        if (v == "avx2" && backend_available(Backend::Avx2)) return Backend::Avx2;
        if (v == "neon" && backend_available(Backend::Neon)) return Backend::Neon;
    }
    if (backend_available(Backend::Avx2)) return Backend::Avx2;
    if (backend_available(Backend::Neon)) return Backend::Neon;
    return Backend::Scalar;
}

// -1 until first use.
std::atomic<int> g_backend{-1};

}  // namespace

std::string_view backend_name(Backend b) noexcept {
    switch (b) {
        case Backend::Scalar: return "scalar";
        case Backend::Avx2: return "avx2";
        case Backend::Neon: return "neon";
    }
    return "unknown";
}

bool backend_available(Backend b) noexcept {
    switch (b) {
        case Backend::Scalar:
            return true;
        case Backend::Avx2:
#if defined(LEAKAUDIT_HAVE_AVX2)
            return __builtin_cpu_supports("avx2");
#else
            return false;
#endif
        case Backend::Neon:
#if defined(LEAKAUDIT_HAVE_NEON)
            return true;
#else
            return false;
#endif
    }
    return false;
}

Backend active_backend() noexcept {
    int v = g_backend.load(std::memory_order_acquire);
    if (v < 0) {
        v = static_cast<int>(detect());
        int expected = -1;
        if (!g_backend.compare_exchange_strong(expected, v)) v = expected;
    }
    return static_cast<Backend>(v);
}

bool force_backend(Backend b) noexcept {
    if (!backend_available(b)) return false;
    g_backend.store(static_cast<int>(b), std::memory_order_release);
    return true;
}

double squared_l2_scalar(const double* a, const double* b, std::size_t dim) noexcept {
    double lane[4] = {0.0, 0.0, 0.0, 0.0};
    std::size_t i = 0;
    for (; i + 4 <= dim; i += 4) {
        for (std::size_t j = 0; j < 4; ++j) {
            const double d = a[i + j] - b[i + j];
            lane[j] += d * d;
        }
    }
    double acc = (lane[0] + lane[1]) + (lane[2] + lane[3]);
    for (; i < dim; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

double squared_l2(const double* a, const double* b, std::size_t dim) noexcept {
    return kernel_for(active_backend())(a, b, dim);
}

void squared_l2_to_rows(Backend backend, std::span<const double> query,
                        std::span<const double> rows, std::span<double> out) noexcept {
    const Kernel k = kernel_for(backend_available(backend) ? backend : Backend::Scalar);
    const std::size_t dim = query.size();
    for (std::size_t r = 0; r < out.size(); ++r) {
        out[r] = k(query.data(), rows.data() + r * dim, dim);
    }
}

void squared_l2_to_rows(std::span<const double> query, std::span<const double> rows,
                        std::span<double> out) noexcept {
    squared_l2_to_rows(active_backend(), query, rows, out);
}

}  // namespace leakaudit::simd
