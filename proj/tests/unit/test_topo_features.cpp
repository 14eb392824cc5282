#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "tdaood/topo_features.hpp"

using namespace tdaood;

namespace {

PersistenceDiagram diagram(std::vector<PersistencePair> points, int max_dim = 3) {
    PersistenceDiagram d;
    d.points = std::move(points);
    d.cap = 1.0;
    d.max_dim = max_dim;
    return d;
}

PersistenceDiagram random_diagram(std::mt19937_64& rng, int dim, std::size_t count) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<PersistencePair> points;
    for (std::size_t i = 0; i < count; ++i) {
        const double b = 0.5 * u(rng);
        points.push_back({b, b + 1e-3 + 0.5 * u(rng), dim});
    }
    return diagram(points);
}

}  // namespace

TEST(Entropy, SingleBarIsZero) {
    EXPECT_EQ(persistence_entropy(diagram({{0.0, 0.4, 0}}), 0), 0.0);
}

TEST(Entropy, TwoEqualBarsIsOneBit) {
    EXPECT_DOUBLE_EQ(persistence_entropy(diagram({{0.0, 0.3, 1}, {0.1, 0.4, 1}}), 1), 1.0);
}

TEST(Entropy, EmptyDimensionIsMinusOne) {
    EXPECT_EQ(persistence_entropy(diagram({}), 0), -1.0);
    EXPECT_EQ(persistence_entropy(diagram({{0.0, 0.4, 0}}), 2), -1.0);
}

TEST(Entropy, EqualBarsGiveLogCount) {
    for (int k = 1; k <= 16; ++k) {
        std::vector<PersistencePair> points;
        for (int i = 0; i < k; ++i) points.push_back({0.01 * i, 0.01 * i + 0.25, 1});
        EXPECT_NEAR(persistence_entropy(diagram(points), 1), std::log2(k), 1e-12) << k;
    }
}

TEST(Entropy, ScaleInvariant) {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 50; ++trial) {
        auto d = random_diagram(rng, 1, 1 + rng() % 10);
        const double before = persistence_entropy(d, 1);
        for (auto& p : d.points) {
            p.birth *= 0.37;
            p.death *= 0.37;
        }
        EXPECT_NEAR(persistence_entropy(d, 1), before, 1e-12);
    }
}

TEST(Amplitude, BottleneckExamples) {
    EXPECT_DOUBLE_EQ(amplitude_bottleneck(diagram({{0.0, 0.5, 0}}), 0), 0.25);
    EXPECT_DOUBLE_EQ(amplitude_bottleneck(diagram({{0.1, 0.4, 1}, {0.0, 0.2, 1}}), 1), 0.15);
    EXPECT_EQ(amplitude_bottleneck(diagram({}), 0), 0.0);
}

TEST(Amplitude, WassersteinExamples) {
    EXPECT_DOUBLE_EQ(amplitude_wasserstein(diagram({{0.0, 0.5, 0}}), 0, 2.0), 0.25);
    EXPECT_NEAR(amplitude_wasserstein(diagram({{0.0, 0.2, 0}, {0.0, 0.2, 0}}), 0, 2.0),
                0.14142135623730951, 1e-15);
    EXPECT_EQ(amplitude_wasserstein(diagram({}), 3, 2.0), 0.0);
    EXPECT_DOUBLE_EQ(amplitude_wasserstein(diagram({{0.0, 0.2, 0}, {0.0, 0.4, 0}}), 0, 1.0), 0.3);
    EXPECT_THROW(amplitude_wasserstein(diagram({}), 0, 0.5), std::invalid_argument);
}

TEST(Amplitude, BottleneckNeverExceedsWasserstein) {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto d = random_diagram(rng, 0, rng() % 12);
        const double p = 1.0 + static_cast<double>(rng() % 40) / 10.0;
        EXPECT_LE(amplitude_bottleneck(d, 0), amplitude_wasserstein(d, 0, p) + 1e-15);
    }
}

TEST(Amplitude, OneHomogeneous) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        auto d = random_diagram(rng, 2, 1 + rng() % 8);
        const double b = amplitude_bottleneck(d, 2);
        const double w = amplitude_wasserstein(d, 2);
        for (auto& p : d.points) {
            p.birth *= 3.0;
            p.death *= 3.0;
        }
        EXPECT_NEAR(amplitude_bottleneck(d, 2), 3.0 * b, 1e-12);
        EXPECT_NEAR(amplitude_wasserstein(d, 2), 3.0 * w, 1e-12);
    }
}

// Hand-computed: dim 0 bars of length 0.2 and 0.6, dim 1 single bar of 0.4.
// entropy0 = -(0.25 log2 0.25 + 0.75 log2 0.75), bottleneck0 = 0.3,
// wasserstein0 = sqrt(0.1^2 + 0.3^2); dim 1: 0, 0.2, 0.2.
TEST(Assemble, SingleHeadHandComputed) {
    HeadDiagrams heads{1, 1, {diagram({{0.0, 0.2, 0}, {0.0, 0.6, 0}, {0.3, 0.7, 1}}, 1)}};
    const auto v = assemble_feature_vector("s", "A", Split::test, heads, 1);
    ASSERT_EQ(v.values.size(), 6u);
    const double h0 = -(0.25 * std::log2(0.25) + 0.75 * std::log2(0.75));
    EXPECT_NEAR(v.values[0], h0, 1e-12);
    EXPECT_NEAR(v.values[1], 0.3, 1e-12);
    EXPECT_NEAR(v.values[2], std::sqrt(0.01 + 0.09), 1e-12);
    EXPECT_EQ(v.values[3], 0.0);
    EXPECT_NEAR(v.values[4], 0.2, 1e-12);
    EXPECT_NEAR(v.values[5], 0.2, 1e-12);
}

TEST(Assemble, EmptyDiagramsGiveSentinels) {
    HeadDiagrams heads{2, 3, std::vector<PersistenceDiagram>(6, diagram({}, 3))};
    const auto v = assemble_feature_vector("s", "A", Split::test, heads, 3);
    ASSERT_EQ(v.values.size(), 2u * 3u * 4u * 3u);
    for (std::size_t i = 0; i < v.values.size(); ++i) {
        EXPECT_EQ(v.values[i], i % 3 == 0 ? -1.0 : 0.0) << i;
    }
}

TEST(Assemble, BertBaseLength) {
    HeadDiagrams heads{12, 12, std::vector<PersistenceDiagram>(144, diagram({{0.0, 1.0, 0}}, 3))};
    EXPECT_EQ(assemble_feature_vector("s", "A", Split::test, heads, 3).values.size(), 1728u);
}

TEST(Assemble, LayoutFollowsHeadIndex) {
    // Head (layer 1, head 0) of a 2x2 grid is the third diagram.
    std::vector<PersistenceDiagram> ds(4, diagram({}, 0));
    ds[2] = diagram({{0.0, 0.8, 0}}, 0);
    const auto v = assemble_feature_vector("s", "A", Split::test, {2, 2, ds}, 0);
    ASSERT_EQ(v.values.size(), 12u);
    EXPECT_EQ(v.values[6], 0.0);
    EXPECT_DOUBLE_EQ(v.values[7], 0.4);
    EXPECT_EQ(v.values[0], -1.0);
}

TEST(Assemble, MissingHeadRejected) {
    HeadDiagrams heads{2, 2, std::vector<PersistenceDiagram>(3, diagram({}, 1))};
    EXPECT_THROW(assemble_feature_vector("s", "A", Split::test, heads, 1), std::invalid_argument);
    HeadDiagrams shallow{1, 1, {diagram({}, 0)}};
    EXPECT_THROW(assemble_feature_vector("s", "A", Split::test, shallow, 1), std::invalid_argument);
}

TEST(FeatureFiles, CsvRoundTripIsExact) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::vector<FeatureVector> vs;
    for (int i = 0; i < 5; ++i) {
        FeatureVector v{"id" + std::to_string(i), i % 2 ? "Politics" : "OOD",
                        i % 2 ? Split::validation : Split::ood, {}};
        for (int j = 0; j < 24; ++j) v.values.push_back(u(rng));
        v.values[0] = -1.0;
        vs.push_back(v);
    }
    const auto path = std::filesystem::temp_directory_path() / "tdaood_features.csv";
    write_feature_csv(vs, path);
    EXPECT_EQ(read_feature_csv(path), vs);
    EXPECT_EQ(load_vectors(path), vs);

    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header.rfind("sample_id,label,split,f0000,f0001,", 0), 0u);
    EXPECT_NE(header.find(",f0023"), std::string::npos);
}

TEST(FeatureFiles, BinaryRoundTripOnF32Values) {
    std::vector<FeatureVector> vs{{"a", "X", Split::test, {0.5, -1.0, 0.125}},
                                  {"b", "Y", Split::test, {1.0, 2.0, 3.0}}};
    const auto path = std::filesystem::temp_directory_path() / "tdaood_features.embr";
    write_records(to_embedding_records(vs), path);
    EXPECT_EQ(load_vectors(path), vs);
}
