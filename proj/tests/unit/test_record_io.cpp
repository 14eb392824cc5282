#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <random>

#include "tdaood/record_io.hpp"

using namespace tdaood;

namespace {

std::filesystem::path temp_path(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("tdaood_test_" + name);
}

AttentionTensorRecord uniform_record(std::uint32_t n, std::uint16_t layers, std::uint16_t heads,
                                     const std::string& id = "s0") {
    AttentionTensorRecord r;
    r.sample_id = id;
    r.label = "Politics";
    r.split = Split::validation;
    r.n_tokens = n;
    r.n_layers = layers;
    r.n_heads = heads;
    r.maps.assign(std::size_t{layers} * heads * n * n, 1.0f / static_cast<float>(n));
    return r;
}

SynthOptions small_options(double locality = 0.5) {
    SynthOptions o;
    o.n_tokens = 6;
    o.n_layers = 2;
    o.n_heads = 3;
    o.locality = locality;
    o.sample_id = "x";
    o.label = "A";
    return o;
}

}  // namespace

TEST(RecordIo, TwoTokenUniformRoundTrip) {
    const AttentionRecords records{uniform_record(2, 1, 1)};
    const auto path = temp_path("uniform.atnr");
    write_records(records, path);
    EXPECT_EQ(read_attention_records(path), records);
}

TEST(RecordIo, HeaderLayout) {
    const auto bytes = encode_records(AttentionRecords{uniform_record(2, 1, 1)});
    ASSERT_GE(bytes.size(), 6u);
    EXPECT_EQ(std::memcmp(bytes.data(), "ATNR", 4), 0);
    EXPECT_EQ(bytes[4], 1);
    EXPECT_EQ(bytes[5], 0x01);
    // u32 length | u16 "s0" | u16 "Politics" | u8 split | u32 n | u16 L | u16 H | 4 f32
    const std::uint32_t body = 2 + 2 + 2 + 8 + 1 + 4 + 2 + 2 + 4 * 4;
    std::uint32_t length = 0;
    std::memcpy(&length, bytes.data() + 6, 4);
    EXPECT_EQ(length, body);
    EXPECT_EQ(bytes.size(), 6u + 4u + body);
}

TEST(RecordIo, SynthBatchRoundTrip) {
    AttentionRecords records;
    for (int i = 0; i < 5; ++i) {
        auto o = small_options(0.2 * i);
        o.sample_id = "s" + std::to_string(i);
        records.push_back(synth_attention(100 + i, o));
    }
    EXPECT_EQ(std::get<AttentionRecords>(decode_records(encode_records(records))), records);
}

TEST(RecordIo, EmbeddingRoundTrip) {
    EmbeddingRecords records{{"a", "Politics", Split::test, {0.5f, -1.25f, 3.0f}},
                             {"b", "OOD", Split::ood, {1e-30f, 0.0f, -7.5f}}};
    const auto path = temp_path("emb.embr");
    write_records(records, path);
    EXPECT_EQ(read_embedding_records(path), records);
    EXPECT_THROW(read_attention_records(path), std::runtime_error);
}

TEST(RecordIo, EmptySequenceRejected) {
    EXPECT_THROW(encode_records(AttentionRecords{}), std::invalid_argument);
    EXPECT_THROW(encode_records(EmbeddingRecords{}), std::invalid_argument);
}

TEST(RecordIo, MixedLayerCountsRejected) {
    const AttentionRecords records{uniform_record(2, 12, 1, "a"), uniform_record(2, 6, 1, "b")};
    EXPECT_THROW(encode_records(records), std::invalid_argument);
    const EmbeddingRecords embeddings{{"a", "x", Split::test, {1.0f, 2.0f}},
                                      {"b", "x", Split::test, {1.0f}}};
    EXPECT_THROW(encode_records(embeddings), std::invalid_argument);
}

TEST(RecordIo, NonFiniteRejectedOnWrite) {
    auto r = uniform_record(2, 1, 1);
    r.maps[0] = std::numeric_limits<float>::quiet_NaN();
    EXPECT_THROW(encode_records(AttentionRecords{r}), std::invalid_argument);
    const EmbeddingRecords e{{"a", "x", Split::test, {std::numeric_limits<float>::infinity()}}};
    EXPECT_THROW(encode_records(e), std::invalid_argument);
}

TEST(RecordIo, HalfRowSumRejectedNamingSample) {
    auto r = uniform_record(2, 1, 1, "bad-sample-17");
    r.maps[0] = 0.25f;
    r.maps[1] = 0.25f;
    const auto path = temp_path("halfrow.atnr");
    write_records(AttentionRecords{r}, path);
    try {
        read_records(path);
        FAIL() << "expected a row-sum violation";
    } catch (const std::runtime_error& e) {
        EXPECT_NE(std::string(e.what()).find("bad-sample-17"), std::string::npos) << e.what();
    }
}

TEST(RecordIo, RowSumWithinToleranceAccepted) {
    auto r = uniform_record(2, 1, 1);
    r.maps[0] = 0.50004f;
    EXPECT_NO_THROW(decode_records(encode_records(AttentionRecords{r})));
    r.maps[0] = 0.5002f;
    EXPECT_THROW(decode_records(encode_records(AttentionRecords{r})), std::runtime_error);
}

TEST(RecordIo, SingleTokenRejected) {
    auto r = uniform_record(1, 1, 1, "lonely");
    r.maps = {1.0f};
    EXPECT_THROW(decode_records(encode_records(AttentionRecords{r})), std::runtime_error);
}

TEST(RecordIo, BadMagicVersionAndTruncation) {
    auto bytes = encode_records(AttentionRecords{uniform_record(3, 1, 2)});
    auto bad_magic = bytes;
    bad_magic[0] = 'X';
    EXPECT_THROW(decode_records(bad_magic), std::runtime_error);
    auto bad_version = bytes;
    bad_version[4] = 2;
    EXPECT_THROW(decode_records(bad_version), std::runtime_error);
    auto truncated = bytes;
    truncated.resize(bytes.size() - 3);
    EXPECT_THROW(decode_records(truncated), std::runtime_error);
    EXPECT_THROW(decode_records({'A', 'T'}), std::runtime_error);
}

// Every single-byte corruption either fails loudly or still yields records
// that satisfy all invariants.
TEST(RecordIo, CorruptedBytesFuzz) {
    AttentionRecords records;
    for (int i = 0; i < 3; ++i) {
        auto o = small_options(0.3 * i);
        o.n_tokens = 3;
        o.n_layers = 1;
        o.n_heads = 2;
        o.sample_id = "f" + std::to_string(i);
        records.push_back(synth_attention(i, o));
    }
    const auto bytes = encode_records(records);
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> byte(0, 255);
    for (std::size_t pos = 0; pos < bytes.size(); ++pos) {
        for (int trial = 0; trial < 4; ++trial) {
            auto corrupted = bytes;
            corrupted[pos] = static_cast<std::uint8_t>(byte(rng));
            try {
                const auto batch = decode_records(corrupted);
                if (const auto* a = std::get_if<AttentionRecords>(&batch)) {
                    for (const auto& r : *a) EXPECT_NO_THROW(validate_record(r));
                } else {
                    for (const auto& r : std::get<EmbeddingRecords>(batch)) EXPECT_NO_THROW(validate_record(r));
                }
            } catch (const std::runtime_error&) {
            }
        }
    }
}

TEST(SynthAttention, DeterministicInSeed) {
    const auto a = synth_attention(7, small_options());
    const auto b = synth_attention(7, small_options());
    EXPECT_EQ(encode_records(AttentionRecords{a}), encode_records(AttentionRecords{b}));
    EXPECT_NE(synth_attention(8, small_options()).maps, a.maps);
}

TEST(SynthAttention, RowsSumToExactlyOne) {
    for (double locality : {0.0, 0.1, 0.5, 0.8, 1.0}) {
        const auto r = synth_attention(11, small_options(locality));
        const std::size_t n = r.n_tokens;
        for (std::size_t row = 0; row < r.maps.size() / n; ++row) {
            float fsum = 0.0f;
            double dsum = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                fsum += r.maps[row * n + j];
                dsum += r.maps[row * n + j];
            }
            EXPECT_EQ(fsum, 1.0f);
            EXPECT_EQ(dsum, 1.0);
        }
        EXPECT_NO_THROW(validate_record(r));
    }
}

TEST(SynthAttention, RejectsSingleToken) {
    auto o = small_options();
    o.n_tokens = 1;
    EXPECT_THROW(synth_attention(1, o), std::invalid_argument);
}

TEST(SynthAttention, LocalityConcentratesNearDiagonal) {
    auto mass_near_diagonal = [](const AttentionTensorRecord& r) {
        const std::size_t n = r.n_tokens;
        double near = 0.0;
        for (std::size_t row = 0; row < r.maps.size() / n; ++row) {
            const std::size_t i = row % n;
            for (std::size_t j = 0; j < n; ++j) {
                if ((i > j ? i - j : j - i) <= 1) near += r.maps[row * n + j];
            }
        }
        return near / static_cast<double>(r.maps.size() / n);
    };
    auto o = small_options();
    o.n_tokens = 16;
    o.locality = 0.1;
    const double broad = mass_near_diagonal(synth_attention(3, o));
    o.locality = 0.8;
    const double local = mass_near_diagonal(synth_attention(3, o));
    EXPECT_GT(local, broad + 0.3);
}

// At locality 0 the argmax position of row 0 is uniform over the n columns
// across samples. Chi-square with n-1 = 3 dof; 16.27 is the 0.001 critical value.
TEST(SynthAttention, ZeroLocalityRowsAreExchangeable) {
    constexpr std::size_t n = 4;
    constexpr int samples = 1000;
    auto o = small_options(0.0);
    o.n_tokens = n;
    o.n_layers = 1;
    o.n_heads = 1;
    for (std::size_t row : {std::size_t{0}, std::size_t{2}}) {
        std::array<int, n> counts{};
        for (int s = 0; s < samples; ++s) {
            const auto r = synth_attention(static_cast<std::uint64_t>(s) * 7919u + 13u, o);
            const float* w = r.maps.data() + row * n;
            counts[static_cast<std::size_t>(std::max_element(w, w + n) - w)]++;
        }
        const double expected = static_cast<double>(samples) / n;
        double chi2 = 0.0;
        for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
        EXPECT_LT(chi2, 16.27) << "row " << row;
    }
}
