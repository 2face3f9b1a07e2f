#include "leakaudit/simd/distance.hpp"

#include <arm_neon.h>

namespace leakaudit::simd {

double squared_l2_neon(const double* a, const double* b, std::size_t dim) noexcept {
    // lanes 0,1 in lo; lanes 2,3 in hi
    float64x2_t lo = vdupq_n_f64(0.0);
    float64x2_t hi = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= dim; i += 4) {
        const float64x2_t d0 = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
        const float64x2_t d1 = vsubq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
        lo = vaddq_f64(lo, vmulq_f64(d0, d0));
        hi = vaddq_f64(hi, vmulq_f64(d1, d1));
    }
    double lane[4];
    vst1q_f64(lane, lo);
    vst1q_f64(lane + 2, hi);
    double acc = (lane[0] + lane[1]) + (lane[2] + lane[3]);
    for (; i < dim; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

}  // namespace leakaudit::simd
