#include "egvi/simd/kernels.hpp"

namespace egvi::simd::scalar {

double dot(const float* a, const float* b, std::size_t dim) {
    double acc = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
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

}  // namespace egvi::simd::scalar
