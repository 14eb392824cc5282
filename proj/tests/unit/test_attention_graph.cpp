#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "oracles/random_inputs.hpp"
#include "tdaood/attention_graph.hpp"

using namespace tdaood;

TEST(AttentionGraph, TwoByTwoUsesStrongerDirection) {
    const std::vector<float> w{0.9f, 0.1f, 0.6f, 0.4f};
    const auto d = to_distance_matrix(AttentionMap(2, w));
    EXPECT_EQ(d(0, 0), 0.0);
    EXPECT_EQ(d(1, 1), 0.0);
    EXPECT_DOUBLE_EQ(d(0, 1), 1.0 - static_cast<double>(0.6f));
    EXPECT_NEAR(d(0, 1), 0.4, 1e-7);
    EXPECT_EQ(d(0, 1), d(1, 0));
}

TEST(AttentionGraph, UniformRows) {
    const std::vector<float> w{0.5f, 0.5f, 0.5f, 0.5f};
    const auto d = to_distance_matrix(AttentionMap(2, w));
    EXPECT_EQ(d(0, 1), 0.5);
    EXPECT_EQ(d(1, 0), 0.5);
}

TEST(AttentionGraph, FullAttentionGivesZeroDistance) {
    const float third = 1.0f / 3.0f;
    const std::vector<float> w{0.0f, 1.0f, 0.0f,  //
                               0.0f, 0.5f, 0.5f,  //
                               third, third, third};
    const auto d = to_distance_matrix(AttentionMap(3, w));
    EXPECT_EQ(d(0, 1), 0.0);
    EXPECT_EQ(d(1, 0), 0.0);
    EXPECT_DOUBLE_EQ(d(1, 2), 0.5);
    EXPECT_DOUBLE_EQ(d(0, 2), 1.0 - static_cast<double>(third));
}

TEST(AttentionGraph, RejectsInvalidMaps) {
    const std::vector<float> bad_sum{0.9f, 0.3f, 0.5f, 0.5f};
    EXPECT_THROW(AttentionMap(2, bad_sum), std::invalid_argument);
    const std::vector<float> negative{1.5f, -0.5f, 0.5f, 0.5f};
    EXPECT_THROW(AttentionMap(2, negative), std::invalid_argument);
    const std::vector<float> one{1.0f};
    EXPECT_THROW(AttentionMap(1, one), std::invalid_argument);
}

TEST(DistanceMatrixType, RejectsAsymmetryAndDiagonal) {
    EXPECT_THROW(DistanceMatrix(2, {0.0, 0.1, 0.2, 0.0}), std::invalid_argument);
    EXPECT_THROW(DistanceMatrix(2, {0.1, 0.1, 0.1, 0.0}), std::invalid_argument);
    EXPECT_THROW(DistanceMatrix(2, {0.0, -0.1, -0.1, 0.0}), std::invalid_argument);
    EXPECT_NO_THROW(DistanceMatrix(2, {0.0, 0.1, 0.1, 0.0}));
}

class AttentionGraphProperty : public ::testing::TestWithParam<std::size_t> {};

TEST_P(AttentionGraphProperty, SymmetricZeroDiagonalInRange) {
    std::mt19937_64 rng(GetParam());
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 2 + rng() % 20;
        const auto w = testutil::random_attention(rng, n);
        const auto d = to_distance_matrix(AttentionMap(n, w));
        for (std::size_t i = 0; i < n; ++i) {
            EXPECT_EQ(d(i, i), 0.0);
            for (std::size_t j = 0; j < n; ++j) {
                EXPECT_EQ(d(i, j), d(j, i));
                EXPECT_GE(d(i, j), 0.0);
                EXPECT_LE(d(i, j), 1.0);
            }
        }
    }
}

TEST_P(AttentionGraphProperty, RaisingAttentionNeverIncreasesDistance) {
    std::mt19937_64 rng(GetParam() + 100);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 3 + rng() % 10;
        auto w = testutil::random_attention(rng, n);
        const auto before = to_distance_matrix(AttentionMap(n, w));
        // Move mass within row i toward column j.
        const std::size_t i = rng() % n;
        std::size_t j = rng() % n;
        if (j == i) j = (j + 1) % n;
        const std::size_t k = (j + 1) % n == i ? (j + 2) % n : (j + 1) % n;
        const float moved = w[i * n + k] / 2;
        w[i * n + k] -= moved;
        w[i * n + j] += moved;
        const auto after = to_distance_matrix(AttentionMap(n, w));
        EXPECT_LE(after(i, j), before(i, j));
    }
}

TEST_P(AttentionGraphProperty, PermutationEquivariant) {
    std::mt19937_64 rng(GetParam() + 200);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 2 + rng() % 12;
        const auto w = testutil::random_attention(rng, n);
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<float> permuted(n * n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) permuted[perm[i] * n + perm[j]] = w[i * n + j];
        const auto d = to_distance_matrix(AttentionMap(n, w));
        const auto dp = to_distance_matrix(AttentionMap(n, permuted));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) EXPECT_EQ(dp(perm[i], perm[j]), d(i, j));
    }
}

INSTANTIATE_TEST_SUITE_P(Seeds, AttentionGraphProperty, ::testing::Values(1u, 2u, 3u));
