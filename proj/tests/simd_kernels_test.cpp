#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "egvi/simd/kernels.hpp"
#include "egvi/vectorstore.hpp"
#include "test_support.hpp"

using namespace egvi;

namespace {

std::vector<float> random_floats(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
    std::vector<float> v(n);
    for (auto& x : v) x = dist(rng);
    return v;
}

}  // namespace

TEST(SimdKernels, ScalarAlwaysSupported) {
    EXPECT_TRUE(simd::supported(simd::Isa::kScalar));
    EXPECT_TRUE(simd::supported(simd::active().isa));
}

TEST(SimdKernels, UnsupportedVariantThrows) {
    for (auto isa : {simd::Isa::kAvx2, simd::Isa::kNeon}) {
        if (!simd::supported(isa)) EXPECT_THROW(simd::kernels_for(isa), std::invalid_argument);
    }
}

// Every variant against the scalar reference over dims that exercise the
// vector body, the tail, and both together.
TEST(SimdKernels, DotMatchesScalarReference) {
    std::mt19937_64 rng(7);
    for (auto isa : simd::supported_isas()) {
        const auto& k = simd::kernels_for(isa);
        for (std::size_t dim : {0u, 1u, 3u, 4u, 7u, 8u, 9u, 15u, 16u, 17u, 64u, 100u, 300u, 301u}) {
            auto a = random_floats(dim, rng);
            auto b = random_floats(dim, rng);
            const double ref = simd::scalar::dot(a.data(), b.data(), dim);
            const double got = k.dot(a.data(), b.data(), dim);
            EXPECT_NEAR(got, ref, 1e-12 * std::max(1.0, std::abs(ref)))
                << simd::isa_name(isa) << " dim=" << dim;
        }
    }
}

TEST(SimdKernels, DotRowsMatchesPerRowDot) {
    std::mt19937_64 rng(11);
    const std::size_t rows = 37, dim = 23;
    auto m = random_floats(rows * dim, rng);
    auto q = random_floats(dim, rng);
    for (auto isa : simd::supported_isas()) {
        const auto& k = simd::kernels_for(isa);
        std::vector<double> out(rows);
        k.dot_rows(m.data(), rows, dim, q.data(), out.data());
        for (std::size_t r = 0; r < rows; ++r) {
            EXPECT_EQ(out[r], k.dot(m.data() + r * dim, q.data(), dim));
        }
    }
}

TEST(SimdKernels, IntegerValuedInputsAreExactOnEveryVariant) {
    // Small integers: every partial sum is exactly representable, so the
    // summation order cannot matter.
    std::vector<float> a(41), b(41);
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = static_cast<float>(static_cast<int>(i % 7) - 3);
        b[i] = static_cast<float>(static_cast<int>(i % 5) - 2);
    }
    const double ref = simd::scalar::dot(a.data(), b.data(), a.size());
    for (auto isa : simd::supported_isas()) {
        EXPECT_EQ(simd::kernels_for(isa).dot(a.data(), b.data(), a.size()), ref);
    }
}

TEST(SimdKernels, TopKIdenticalAcrossVariants) {
    const auto m = testutil::random_unit_matrix(700, 48, 3);
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        auto q = random_floats(48, rng);
        SearchOptions scalar_opts{&simd::kernels_for(simd::Isa::kScalar), 1};
        const auto ref = top_k(m, q, 25, {}, scalar_opts);
        for (auto isa : simd::supported_isas()) {
            SearchOptions opts{&simd::kernels_for(isa), 1};
            const auto got = top_k(m, q, 25, {}, opts);
            ASSERT_EQ(got.size(), ref.size());
            for (std::size_t i = 0; i < ref.size(); ++i) {
                EXPECT_EQ(got[i].word_id, ref[i].word_id) << simd::isa_name(isa);
                EXPECT_NEAR(got[i].score, ref[i].score, 1e-12);
            }
        }
    }
}
