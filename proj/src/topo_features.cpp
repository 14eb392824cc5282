#include "tdaood/topo_features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace tdaood {

namespace {

template <typename Fn>
void for_each_lifetime(const PersistenceDiagram& diagram, int dim, Fn&& fn) {
    for (const auto& p : diagram.points) {
        if (p.dim == dim) {
            fn(p.lifetime());
        }
    }
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) {
        fields.push_back(field);
    }
    if (!line.empty() && line.back() == ',') {
        fields.emplace_back();
    }
    return fields;
}

double parse_double(const std::string& text, const std::string& context) {
    double value = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
        throw std::runtime_error(context + ": cannot parse number '" + text + "'");
    }
    return value;
}

}  // namespace

double persistence_entropy(const PersistenceDiagram& diagram, int dim) {
    double total = 0.0;
    std::size_t count = 0;
    for_each_lifetime(diagram, dim, [&](double l) {
        total += l;
        ++count;
    });
    if (count == 0 || !(total > 0.0)) {
        return kEmptyEntropy;
    }
    double entropy = 0.0;
    for_each_lifetime(diagram, dim, [&](double l) {
        const double p = l / total;
        if (p > 0.0) {
            entropy -= p * std::log2(p);
        }
    });
    // -0.0 for a single bar.
    return entropy == 0.0 ? 0.0 : entropy;
}

double amplitude_bottleneck(const PersistenceDiagram& diagram, int dim) {
    double amplitude = 0.0;
    for_each_lifetime(diagram, dim, [&](double l) { amplitude = std::max(amplitude, l / 2.0); });
    return amplitude;
}

double amplitude_wasserstein(const PersistenceDiagram& diagram, int dim, double p) {
    if (!(p >= 1.0)) {
        throw std::invalid_argument("wasserstein order p must be >= 1");
    }
    double sum = 0.0;
    for_each_lifetime(diagram, dim, [&](double l) { sum += std::pow(l / 2.0, p); });
    return sum > 0.0 ? std::pow(sum, 1.0 / p) : 0.0;
}

FeatureVector assemble_feature_vector(const std::string& sample_id, const std::string& label,
                                      Split split, const HeadDiagrams& heads, int max_hom_dim,
                                      double wasserstein_p) {
    if (max_hom_dim < 0) {
        throw std::invalid_argument("max_hom_dim must be >= 0");
    }
    const std::size_t n_maps = heads.n_layers * heads.n_heads;
    if (n_maps == 0 || heads.diagrams.size() != n_maps) {
        throw std::invalid_argument("sample '" + sample_id + "': expected diagrams for " +
                                    std::to_string(n_maps) + " heads, got " +
                                    std::to_string(heads.diagrams.size()));
    }
    const auto dims = static_cast<std::size_t>(max_hom_dim) + 1;

    FeatureVector out;
    out.sample_id = sample_id;
    out.label = label;
    out.split = split;
    out.values.reserve(n_maps * dims * kFeaturesPerDim);
    for (std::size_t m = 0; m < n_maps; ++m) {
        const PersistenceDiagram& diagram = heads.diagrams[m];
        if (diagram.max_dim < max_hom_dim) {
            throw std::invalid_argument("sample '" + sample_id + "': head " + std::to_string(m) +
                                        " diagram stops at dim " +
                                        std::to_string(diagram.max_dim));
        }
        for (int dim = 0; dim <= max_hom_dim; ++dim) {
            out.values.push_back(persistence_entropy(diagram, dim));
            out.values.push_back(amplitude_bottleneck(diagram, dim));
            out.values.push_back(amplitude_wasserstein(diagram, dim, wasserstein_p));
        }
    }
    return out;
}

void write_feature_csv(const std::vector<FeatureVector>& vectors, const std::filesystem::path& path) {
    if (vectors.empty()) {
        throw std::invalid_argument("write_feature_csv: no vectors");
    }
    const std::size_t dim = vectors.front().values.size();
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    }
    out << "sample_id,label,split";
    char name[32];
    for (std::size_t i = 0; i < dim; ++i) {
        std::snprintf(name, sizeof name, ",f%04zu", i);
        out << name;
    }
    out << '\n';
    out.precision(std::numeric_limits<double>::max_digits10);
    for (const auto& v : vectors) {
        if (v.values.size() != dim) {
            throw std::invalid_argument("write_feature_csv: sample '" + v.sample_id +
                                        "' has a different length");
        }
        if (v.sample_id.find(',') != std::string::npos || v.label.find(',') != std::string::npos) {
            throw std::invalid_argument("write_feature_csv: sample '" + v.sample_id +
                                        "' id or label contains a comma");
        }
        out << v.sample_id << ',' << v.label << ',' << to_string(v.split);
        for (double x : v.values) {
            out << ',' << x;
        }
        out << '\n';
    }
    if (!out) {
        throw std::runtime_error("write failed for '" + path.string() + "'");
    }
}

std::vector<FeatureVector> read_feature_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open '" + path.string() + "'");
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error(path.string() + ": empty feature file");
    }
    const auto header = split_csv_line(line);
    if (header.size() < 4 || header[0] != "sample_id" || header[1] != "label" ||
        header[2] != "split") {
        throw std::runtime_error(path.string() + ": not a feature CSV");
    }
    const std::size_t dim = header.size() - 3;
    std::vector<FeatureVector> vectors;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        const std::string context = path.string() + ":" + std::to_string(line_no);
        const auto fields = split_csv_line(line);
        if (fields.size() != dim + 3) {
            throw std::runtime_error(context + ": expected " + std::to_string(dim + 3) +
                                     " fields, got " + std::to_string(fields.size()));
        }
        FeatureVector v;
        v.sample_id = fields[0];
        v.label = fields[1];
        v.split = parse_split(fields[2]);
        v.values.reserve(dim);
        for (std::size_t i = 0; i < dim; ++i) {
            v.values.push_back(parse_double(fields[i + 3], context));
        }
        vectors.push_back(std::move(v));
    }
    return vectors;
}

EmbeddingRecords to_embedding_records(const std::vector<FeatureVector>& vectors) {
    EmbeddingRecords records;
    records.reserve(vectors.size());
    for (const auto& v : vectors) {
        EmbeddingRecord r;
        r.sample_id = v.sample_id;
        r.label = v.label;
        r.split = v.split;
        r.vector.assign(v.values.begin(), v.values.end());
        records.push_back(std::move(r));
    }
    return records;
}

std::vector<FeatureVector> from_embedding_records(const EmbeddingRecords& records) {
    std::vector<FeatureVector> vectors;
    vectors.reserve(records.size());
    for (const auto& r : records) {
        vectors.push_back({r.sample_id, r.label, r.split, {r.vector.begin(), r.vector.end()}});
    }
    return vectors;
}

std::vector<FeatureVector> load_vectors(const std::filesystem::path& path) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) {
        throw std::runtime_error("cannot open '" + path.string() + "'");
    }
    char magic[4] = {};
    probe.read(magic, 4);
    if (probe.gcount() == 4 && std::string(magic, 4) == "EMBR") {
        return from_embedding_records(read_embedding_records(path));
    }
    return read_feature_csv(path);
}

}  // namespace tdaood
