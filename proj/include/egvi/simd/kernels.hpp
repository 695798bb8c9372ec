#pragma once

// Dot-product kernels behind the exact k-NN scan.
//
// Every variant reads float32 components and accumulates in float64. A product
// of two floats is exact in double, so variants differ only in summation order
// and agree to within a few ulps of the double result. The scalar variant is
// the reference; vectorized variants are selected at runtime from what the CPU
// reports and can be pinned with EGVI_SIMD=scalar|avx2|neon.

#include <cstddef>
#include <string_view>
#include <vector>

namespace egvi::simd {

enum class Isa { kScalar, kAvx2, kNeon };

using DotFn = double (*)(const float* a, const float* b, std::size_t dim);
// out[r] = dot(rows + r * dim, query) for r in [0, n_rows).
using DotRowsFn = void (*)(const float* rows, std::size_t n_rows, std::size_t dim,
                           const float* query, double* out);

struct Kernels {
    Isa isa;
    std::string_view name;
    DotFn dot;
    DotRowsFn dot_rows;
};

std::string_view isa_name(Isa isa);

// Compiled in and supported by the running CPU.
bool supported(Isa isa);
std::vector<Isa> supported_isas();

// Throws std::invalid_argument if `isa` is not supported here.
const Kernels& kernels_for(Isa isa);

// Process-wide selection; resolved once on first call.
const Kernels& active();

namespace scalar {
double dot(const float* a, const float* b, std::size_t dim);
void dot_rows(const float* rows, std::size_t n_rows, std::size_t dim, const float* query,
              double* out);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
double dot(const float* a, const float* b, std::size_t dim);
void dot_rows(const float* rows, std::size_t n_rows, std::size_t dim, const float* query,
              double* out);
}  // namespace avx2
#endif

#if defined(__aarch64__)
namespace neon {
double dot(const float* a, const float* b, std::size_t dim);
void dot_rows(const float* rows, std::size_t n_rows, std::size_t dim, const float* query,
              double* out);
}  // namespace neon
#endif

}  // namespace egvi::simd
