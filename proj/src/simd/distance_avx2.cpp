// Built with -mavx2 only; the dispatcher checks CPU support before calling in.
#include "leakaudit/simd/distance.hpp"

#include <immintrin.h>

namespace leakaudit::simd {

double squared_l2_avx2(const double* a, const double* b, std::size_t dim) noexcept {
    __m256d sum = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= dim; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        // mul then add, never fused: must match the scalar reference bit for bit
        sum = _mm256_add_pd(sum, _mm256_mul_pd(d, d));
    }
    alignas(32) double lane[4];
    _mm256_store_pd(lane, sum);
    double acc = (lane[0] + lane[1]) + (lane[2] + lane[3]);
    for (; i < dim; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

}  // namespace leakaudit::simd
