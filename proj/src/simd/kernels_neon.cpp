#include "egvi/simd/kernels.hpp"

#if defined(__aarch64__)
#include <arm_neon.h>

namespace egvi::simd::neon {

double dot(const float* a, const float* b, std::size_t dim) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= dim; i += 4) {
        float32x4_t va = vld1q_f32(a + i);
        float32x4_t vb = vld1q_f32(b + i);
        acc0 = vfmaq_f64(acc0, vcvt_f64_f32(vget_low_f32(va)), vcvt_f64_f32(vget_low_f32(vb)));
        acc1 = vfmaq_f64(acc1, vcvt_high_f64_f32(va), vcvt_high_f64_f32(vb));
    }
    double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
    for (; i < dim; ++i) {
        acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    }
    return acc;
}

void dot_rows(const float* rows, std::size_t n_rows, std::size_t dim, const float* query,
              double* out) {
    for (std::size_t r = 0; r < n_rows; ++r) {
        out[r] = dot(rows + r * dim, query, dim);
    }
}

}  // namespace egvi::simd::neon
#endif
