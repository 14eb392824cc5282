#include "tdaood/record_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numeric>
#include <random>
#include <stdexcept>

namespace tdaood {

namespace {

static_assert(std::endian::native == std::endian::little,
              "record_io assumes a little-endian host");

constexpr char kAttentionMagic[4] = {'A', 'T', 'N', 'R'};
constexpr char kEmbeddingMagic[4] = {'E', 'M', 'B', 'R'};

class ByteWriter {
public:
    void u8(std::uint8_t v) { bytes_.push_back(v); }
    void u16(std::uint16_t v) { put(v); }
    void u32(std::uint32_t v) { put(v); }
    void raw(const void* data, std::size_t size) {
        const auto* p = static_cast<const std::uint8_t*>(data);
        bytes_.insert(bytes_.end(), p, p + size);
    }
    void short_string(const std::string& s, const char* what) {
        if (s.size() > 0xFFFF) {
            throw std::invalid_argument(std::string(what) + " longer than 65535 bytes");
        }
        u16(static_cast<std::uint16_t>(s.size()));
        raw(s.data(), s.size());
    }
    void floats(const std::vector<float>& values) {
        raw(values.data(), values.size() * sizeof(float));
    }
    std::size_t size() const { return bytes_.size(); }
    void patch_u32(std::size_t offset, std::uint32_t v) {
        std::memcpy(bytes_.data() + offset, &v, sizeof v);
    }
    std::vector<std::uint8_t> take() { return std::move(bytes_); }

private:
    template <typename T>
    void put(T v) {
        raw(&v, sizeof v);
    }
    std::vector<std::uint8_t> bytes_;
};

class ByteReader {
public:
    ByteReader(const std::uint8_t* data, std::size_t size) : data_(data), size_(size) {}

    std::size_t remaining() const { return size_ - pos_; }

    std::uint8_t u8() { return get<std::uint8_t>(); }
    std::uint16_t u16() { return get<std::uint16_t>(); }
    std::uint32_t u32() { return get<std::uint32_t>(); }

    std::string short_string() {
        const std::uint16_t len = u16();
        need(len);
        std::string s(reinterpret_cast<const char*>(data_ + pos_), len);
        pos_ += len;
        return s;
    }

    void floats(std::vector<float>& out, std::size_t count) {
        if (count > remaining() / sizeof(float)) {
            throw std::runtime_error("truncated record: float payload exceeds record bounds");
        }
        out.resize(count);
        std::memcpy(out.data(), data_ + pos_, count * sizeof(float));
        pos_ += count * sizeof(float);
    }

private:
    void need(std::size_t n) const {
        if (n > remaining()) {
            throw std::runtime_error("truncated record");
        }
    }
    template <typename T>
    T get() {
        need(sizeof(T));
        T v;
        std::memcpy(&v, data_ + pos_, sizeof v);
        pos_ += sizeof v;
        return v;
    }

    const std::uint8_t* data_;
    std::size_t size_;
    std::size_t pos_ = 0;
};

Split split_from_tag(std::uint8_t tag) {
    if (tag > static_cast<std::uint8_t>(Split::ood)) {
        throw std::runtime_error("invalid split tag " + std::to_string(tag));
    }
    return static_cast<Split>(tag);
}

void write_header(ByteWriter& out, const char (&magic)[4]) {
    out.raw(magic, 4);
    out.u8(kRecordFormatVersion);
    out.u8(kLittleEndianFlag);
}

void write_common(ByteWriter& out, const std::string& sample_id, const std::string& label,
                  Split split) {
    out.short_string(sample_id, "sample_id");
    out.short_string(label, "label");
    out.u8(static_cast<std::uint8_t>(split));
}

void check_finite(const std::vector<float>& values, const std::string& sample_id) {
    for (float v : values) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("sample '" + sample_id + "': non-finite value");
        }
    }
}

template <typename Fn>
std::vector<std::uint8_t> encode_framed(const char (&magic)[4], std::size_t count, Fn&& body) {
    ByteWriter out;
    write_header(out, magic);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t length_at = out.size();
        out.u32(0);
        body(out, i);
        const std::size_t length = out.size() - length_at - sizeof(std::uint32_t);
        if (length > 0xFFFFFFFFu) {
            throw std::invalid_argument("record exceeds 4 GiB");
        }
        out.patch_u32(length_at, static_cast<std::uint32_t>(length));
    }
    return out.take();
}

void write_bytes(const std::vector<std::uint8_t>& bytes, const std::filesystem::path& path) {
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) {
        throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    }
    file.write(reinterpret_cast<const char*>(bytes.data()),
               static_cast<std::streamsize>(bytes.size()));
    if (!file) {
        throw std::runtime_error("write failed for '" + path.string() + "'");
    }
}

}  // namespace

std::string_view to_string(Split split) {
    switch (split) {
        case Split::train: return "train";
        case Split::validation: return "validation";
        case Split::test: return "test";
        case Split::ood: return "ood";
    }
    return "unknown";
}

Split parse_split(std::string_view text) {
    if (text == "train") return Split::train;
    if (text == "validation") return Split::validation;
    if (text == "test") return Split::test;
    if (text == "ood") return Split::ood;
    throw std::invalid_argument("unknown split '" + std::string(text) + "'");
}

void validate_record(const AttentionTensorRecord& record) {
    const std::string who = "sample '" + record.sample_id + "'";
    if (record.n_tokens < 2) {
        throw std::invalid_argument(who + ": n_tokens must be >= 2, got " +
                                    std::to_string(record.n_tokens));
    }
    if (record.n_layers == 0 || record.n_heads == 0) {
        throw std::invalid_argument(who + ": n_layers and n_heads must be positive");
    }
    const std::size_t n = record.n_tokens;
    const std::size_t expected = std::size_t{record.n_layers} * record.n_heads * n * n;
    if (record.maps.size() != expected) {
        throw std::invalid_argument(who + ": map payload has " + std::to_string(record.maps.size()) +
                                    " floats, expected " + std::to_string(expected));
    }
    for (std::size_t row = 0; row < expected / n; ++row) {
        const float* values = record.maps.data() + row * n;
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const float v = values[j];
            if (!(v >= 0.0f && v <= 1.0f)) {
                throw std::invalid_argument(who + ": attention weight outside [0,1]");
            }
            sum += v;
        }
        if (std::abs(sum - 1.0) > kRowSumTolerance) {
            const std::size_t map_index = row / n;
            throw std::invalid_argument(
                who + ": row " + std::to_string(row % n) + " of layer " +
                std::to_string(map_index / record.n_heads) + " head " +
                std::to_string(map_index % record.n_heads) + " sums to " + std::to_string(sum));
        }
    }
}

void validate_record(const EmbeddingRecord& record) {
    if (record.vector.empty()) {
        throw std::invalid_argument("sample '" + record.sample_id + "': empty embedding");
    }
    check_finite(record.vector, record.sample_id);
}

std::vector<std::uint8_t> encode_records(const AttentionRecords& records) {
    if (records.empty()) {
        throw std::invalid_argument("write_records: empty record sequence");
    }
    const auto& first = records.front();
    for (const auto& r : records) {
        if (r.n_layers != first.n_layers || r.n_heads != first.n_heads) {
            throw std::invalid_argument("write_records: sample '" + r.sample_id +
                                        "' has L/H inconsistent with the first record");
        }
        if (r.maps.size() != std::size_t{r.n_layers} * r.n_heads * r.map_size()) {
            throw std::invalid_argument("write_records: sample '" + r.sample_id +
                                        "' map payload does not match L*H*n*n");
        }
        check_finite(r.maps, r.sample_id);
    }
    return encode_framed(kAttentionMagic, records.size(), [&](ByteWriter& out, std::size_t i) {
        const auto& r = records[i];
        write_common(out, r.sample_id, r.label, r.split);
        out.u32(r.n_tokens);
        out.u16(r.n_layers);
        out.u16(r.n_heads);
        out.floats(r.maps);
    });
}

std::vector<std::uint8_t> encode_records(const EmbeddingRecords& records) {
    if (records.empty()) {
        throw std::invalid_argument("write_records: empty record sequence");
    }
    const std::size_t dim = records.front().vector.size();
    for (const auto& r : records) {
        if (r.vector.size() != dim) {
            throw std::invalid_argument("write_records: sample '" + r.sample_id +
                                        "' embedding length differs from the first record");
        }
        check_finite(r.vector, r.sample_id);
    }
    return encode_framed(kEmbeddingMagic, records.size(), [&](ByteWriter& out, std::size_t i) {
        const auto& r = records[i];
        write_common(out, r.sample_id, r.label, r.split);
        out.u32(static_cast<std::uint32_t>(r.vector.size()));
        out.floats(r.vector);
    });
}

RecordBatch decode_records(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 6) {
        throw std::runtime_error("bad header: file shorter than 6 bytes");
    }
    const bool attention = std::memcmp(bytes.data(), kAttentionMagic, 4) == 0;
    const bool embedding = std::memcmp(bytes.data(), kEmbeddingMagic, 4) == 0;
    if (!attention && !embedding) {
        throw std::runtime_error("bad magic: expected ATNR or EMBR");
    }
    if (bytes[4] != kRecordFormatVersion) {
        throw std::runtime_error("unsupported format version " + std::to_string(bytes[4]));
    }
    if (bytes[5] != kLittleEndianFlag) {
        throw std::runtime_error("unsupported endianness flag");
    }

    AttentionRecords attention_records;
    EmbeddingRecords embedding_records;
    std::size_t offset = 6;
    while (offset < bytes.size()) {
        const std::size_t index = attention ? attention_records.size() : embedding_records.size();
        ByteReader prefix(bytes.data() + offset, bytes.size() - offset);
        std::uint32_t length = 0;
        try {
            length = prefix.u32();
        } catch (const std::exception&) {
            throw std::runtime_error("truncated record #" + std::to_string(index));
        }
        if (length > prefix.remaining()) {
            throw std::runtime_error("truncated record #" + std::to_string(index));
        }
        const std::size_t start = offset + sizeof(std::uint32_t);
        ByteReader body(bytes.data() + start, length);
        std::string sample_id;
        try {
            sample_id = body.short_string();
            std::string label = body.short_string();
            const Split split = split_from_tag(body.u8());
            if (attention) {
                AttentionTensorRecord r;
                r.sample_id = sample_id;
                r.label = std::move(label);
                r.split = split;
                r.n_tokens = body.u32();
                r.n_layers = body.u16();
                r.n_heads = body.u16();
                // Any n above sqrt(length) cannot fit the payload; rejecting it early also
                // keeps the element count below size_t overflow.
                if (std::size_t{r.n_tokens} * r.n_tokens > length ||
                    std::size_t{r.n_layers} * r.n_heads > length) {
                    throw std::runtime_error("truncated record: float payload exceeds record bounds");
                }
                const std::size_t count =
                    std::size_t{r.n_layers} * r.n_heads * std::size_t{r.n_tokens} * r.n_tokens;
                body.floats(r.maps, count);
                if (body.remaining() != 0) {
                    throw std::runtime_error("record length does not match its payload");
                }
                validate_record(r);
                if (!attention_records.empty()) {
                    const auto& first = attention_records.front();
                    if (first.n_layers != r.n_layers || first.n_heads != r.n_heads) {
                        throw std::runtime_error("L/H inconsistent with the first record");
                    }
                }
                attention_records.push_back(std::move(r));
            } else {
                EmbeddingRecord r;
                r.sample_id = sample_id;
                r.label = std::move(label);
                r.split = split;
                const std::uint32_t dim = body.u32();
                body.floats(r.vector, dim);
                if (body.remaining() != 0) {
                    throw std::runtime_error("record length does not match its payload");
                }
                validate_record(r);
                if (!embedding_records.empty() &&
                    embedding_records.front().vector.size() != r.vector.size()) {
                    throw std::runtime_error("embedding length inconsistent with the first record");
                }
                embedding_records.push_back(std::move(r));
            }
        } catch (const std::exception& e) {
            const std::string where = sample_id.empty()
                                          ? "record #" + std::to_string(index)
                                          : "record #" + std::to_string(index) + " ('" + sample_id + "')";
            throw std::runtime_error(where + ": " + e.what());
        }
        offset = start + length;
    }
    if (attention) {
        return attention_records;
    }
    return embedding_records;
}

void write_records(const AttentionRecords& records, const std::filesystem::path& path) {
    write_bytes(encode_records(records), path);
}

void write_records(const EmbeddingRecords& records, const std::filesystem::path& path) {
    write_bytes(encode_records(records), path);
}

RecordBatch read_records(const std::filesystem::path& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) {
        throw std::runtime_error("cannot open '" + path.string() + "'");
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(file)),
                                    std::istreambuf_iterator<char>());
    try {
        return decode_records(bytes);
    } catch (const std::exception& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

AttentionRecords read_attention_records(const std::filesystem::path& path) {
    auto batch = read_records(path);
    if (auto* records = std::get_if<AttentionRecords>(&batch)) {
        return std::move(*records);
    }
    throw std::runtime_error(path.string() + ": expected an ATNR file, found EMBR");
}

EmbeddingRecords read_embedding_records(const std::filesystem::path& path) {
    auto batch = read_records(path);
    if (auto* records = std::get_if<EmbeddingRecords>(&batch)) {
        return std::move(*records);
    }
    throw std::runtime_error(path.string() + ": expected an EMBR file, found ATNR");
}

AttentionTensorRecord synth_attention(std::uint64_t seed, const SynthOptions& options) {
    if (options.n_tokens < 2) {
        throw std::invalid_argument("synth_attention: n_tokens must be >= 2");
    }
    if (options.n_layers == 0 || options.n_heads == 0) {
        throw std::invalid_argument("synth_attention: n_layers and n_heads must be positive");
    }
    if (!(options.locality >= 0.0 && options.locality <= 1.0)) {
        throw std::invalid_argument("synth_attention: locality must lie in [0,1]");
    }

    // Concentration decays by exp(-kDecay * locality) per token of offset.
    constexpr double kDecay = 3.0;
    constexpr double kMinConcentration = 1e-3;
    constexpr std::uint32_t kQuantum = 1u << 24;

    AttentionTensorRecord record;
    record.sample_id = options.sample_id;
    record.label = options.label;
    record.split = options.split;
    record.n_tokens = options.n_tokens;
    record.n_layers = options.n_layers;
    record.n_heads = options.n_heads;

    const std::size_t n = options.n_tokens;
    const std::size_t n_rows = std::size_t{options.n_layers} * options.n_heads * n;
    record.maps.resize(n_rows * n);

    std::mt19937_64 rng(seed);
    std::vector<double> weights(n);
    std::vector<std::uint32_t> quanta(n);
    std::vector<std::size_t> order(n);
    for (std::size_t row = 0; row < n_rows; ++row) {
        const std::size_t i = row % n;
        double total = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double offset = static_cast<double>(i > j ? i - j : j - i);
            const double alpha =
                std::max(kMinConcentration, std::exp(-kDecay * options.locality * offset));
            std::gamma_distribution<double> gamma(alpha, 1.0);
            weights[j] = gamma(rng);
            total += weights[j];
        }
        if (!(total > 0.0)) {
            std::fill(weights.begin(), weights.end(), 0.0);
            weights[i] = 1.0;
            total = 1.0;
        }

        // Largest-remainder rounding to multiples of 2^-24.
        std::uint32_t assigned = 0;
        for (std::size_t j = 0; j < n; ++j) {
            weights[j] = weights[j] / total * kQuantum;
            quanta[j] = static_cast<std::uint32_t>(std::floor(weights[j]));
            weights[j] -= quanta[j];
            assigned += quanta[j];
        }
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return weights[a] > weights[b]; });
        for (std::size_t k = 0; assigned < kQuantum; ++k, ++assigned) {
            ++quanta[order[k % n]];
        }

        float* out = record.maps.data() + row * n;
        for (std::size_t j = 0; j < n; ++j) {
            out[j] = static_cast<float>(quanta[j]) / static_cast<float>(kQuantum);
        }
    }
    return record;
}

}  // namespace tdaood
