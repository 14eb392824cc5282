#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace tdaood {

enum class Split : std::uint8_t { train = 0, validation = 1, test = 2, ood = 3 };

std::string_view to_string(Split split);
Split parse_split(std::string_view text);

// One sample's stack of L x H attention maps, each n x n, row-major.
struct AttentionTensorRecord {
    std::string sample_id;
    std::string label;
    Split split = Split::train;
    std::uint32_t n_tokens = 0;
    std::uint16_t n_layers = 0;
    std::uint16_t n_heads = 0;
    std::vector<float> maps;

    std::size_t map_size() const { return std::size_t{n_tokens} * n_tokens; }
    // Pointer to the first entry of map (layer, head).
    const float* map_data(std::size_t layer, std::size_t head) const {
        return maps.data() + (layer * n_heads + head) * map_size();
    }

    friend bool operator==(const AttentionTensorRecord&, const AttentionTensorRecord&) = default;
};

struct EmbeddingRecord {
    std::string sample_id;
    std::string label;
    Split split = Split::train;
    std::vector<float> vector;

    friend bool operator==(const EmbeddingRecord&, const EmbeddingRecord&) = default;
};

using AttentionRecords = std::vector<AttentionTensorRecord>;
using EmbeddingRecords = std::vector<EmbeddingRecord>;
using RecordBatch = std::variant<AttentionRecords, EmbeddingRecords>;

inline constexpr std::uint8_t kRecordFormatVersion = 1;
inline constexpr std::uint8_t kLittleEndianFlag = 0x01;
inline constexpr double kRowSumTolerance = 1e-4;

// Throws std::invalid_argument naming the sample on the first violated invariant.
void validate_record(const AttentionTensorRecord& record);
void validate_record(const EmbeddingRecord& record);

// Serialize to / parse from an in-memory byte buffer. The file variants are thin wrappers.
std::vector<std::uint8_t> encode_records(const AttentionRecords& records);
std::vector<std::uint8_t> encode_records(const EmbeddingRecords& records);
RecordBatch decode_records(const std::vector<std::uint8_t>& bytes);

void write_records(const AttentionRecords& records, const std::filesystem::path& path);
void write_records(const EmbeddingRecords& records, const std::filesystem::path& path);
RecordBatch read_records(const std::filesystem::path& path);

AttentionRecords read_attention_records(const std::filesystem::path& path);
EmbeddingRecords read_embedding_records(const std::filesystem::path& path);

struct SynthOptions {
    std::uint32_t n_tokens = 16;
    std::uint16_t n_layers = 2;
    std::uint16_t n_heads = 2;
    // 0 = exchangeable rows, 1 = mass concentrated on near-diagonal tokens.
    double locality = 0.5;
    std::string sample_id;
    std::string label;
    Split split = Split::train;
};

/// Deterministic synthetic attention record.
///
/// Every row is a Dirichlet draw whose concentration parameters decay with
/// distance from the diagonal at a rate proportional to `locality`. Rows are
/// quantized to multiples of 2^-24 so that they sum to exactly 1 in f32.
AttentionTensorRecord synth_attention(std::uint64_t seed, const SynthOptions& options);

}  // namespace tdaood
