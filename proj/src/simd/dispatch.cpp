#include <cstdlib>
#include <stdexcept>
#include <string>

#include "egvi/simd/kernels.hpp"

namespace egvi::simd {
namespace {

constexpr Kernels kScalarKernels{Isa::kScalar, "scalar", &scalar::dot, &scalar::dot_rows};
#if defined(__x86_64__) || defined(_M_X64)
constexpr Kernels kAvx2Kernels{Isa::kAvx2, "avx2", &avx2::dot, &avx2::dot_rows};
#endif
#if defined(__aarch64__)
constexpr Kernels kNeonKernels{Isa::kNeon, "neon", &neon::dot, &neon::dot_rows};
#endif

bool cpu_has(Isa isa) {
    switch (isa) {
        case Isa::kScalar:
            return true;
        case Isa::kAvx2:
#if (defined(__x86_64__) || defined(_M_X64)) && (defined(__GNUC__) || defined(__clang__))
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
            return false;
#endif
        case Isa::kNeon:
#if defined(__aarch64__)
            return true;  // mandatory on AArch64
#else
            return false;
#endif
    }
    return false;
}

const Kernels& resolve() {
    if (const char* forced = std::getenv("EGVI_SIMD"); forced && *forced) {
        std::string name(forced);
        for (Isa isa : {Isa::kScalar, Isa::kAvx2, Isa::kNeon}) {
            if (isa_name(isa) == name && supported(isa)) return kernels_for(isa);
        }
        // Unknown or unsupported request: fall through to auto-detection.
    }
    if (supported(Isa::kAvx2)) return kernels_for(Isa::kAvx2);
    if (supported(Isa::kNeon)) return kernels_for(Isa::kNeon);
    return kScalarKernels;
}

}  // namespace

std::string_view isa_name(Isa isa) {
    switch (isa) {
        case Isa::kScalar:
            return "scalar";
        case Isa::kAvx2:
            return "avx2";
        case Isa::kNeon:
            return "neon";
    }
    return "unknown";
}

bool supported(Isa isa) { return cpu_has(isa); }

std::vector<Isa> supported_isas() {
    std::vector<Isa> out;
    for (Isa isa : {Isa::kScalar, Isa::kAvx2, Isa::kNeon}) {
        if (supported(isa)) out.push_back(isa);
    }
    return out;
}

const Kernels& kernels_for(Isa isa) {
    if (!supported(isa)) {
        throw std::invalid_argument("SIMD variant not available: " + std::string(isa_name(isa)));
    }
    switch (isa) {
#if defined(__x86_64__) || defined(_M_X64)
        case Isa::kAvx2:
            return kAvx2Kernels;
#endif
#if defined(__aarch64__)
        case Isa::kNeon:
            return kNeonKernels;
#endif
        default:
            return kScalarKernels;
    }
}

const Kernels& active() {
    static const Kernels& selected = resolve();
    return selected;
}

}  // namespace egvi::simd
