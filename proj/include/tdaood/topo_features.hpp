#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "tdaood/record_io.hpp"
#include "tdaood/vr_persistence.hpp"

namespace tdaood {

inline constexpr std::size_t kFeaturesPerDim = 3;  // entropy, bottleneck, wasserstein
inline constexpr double kEmptyEntropy = -1.0;

struct FeatureVector {
    std::string sample_id;
    std::string label;
    Split split = Split::train;
    std::vector<double> values;

    friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

// Shannon entropy (base 2) of normalized lifetimes in `dim`; -1 when the dim is empty.
double persistence_entropy(const PersistenceDiagram& diagram, int dim);

// max (death - birth) / 2 over `dim`; 0 when empty.
double amplitude_bottleneck(const PersistenceDiagram& diagram, int dim);

// (sum ((death - birth) / 2)^p)^(1/p) over `dim`; 0 when empty. Requires p >= 1.
double amplitude_wasserstein(const PersistenceDiagram& diagram, int dim, double p = 2.0);

// Per-head diagrams of one sample, indexed [layer * n_heads + head].
struct HeadDiagrams {
    std::size_t n_layers = 0;
    std::size_t n_heads = 0;
    std::vector<PersistenceDiagram> diagrams;
};

/// Concatenates [entropy, bottleneck, wasserstein] for dims 0..max_hom_dim of
/// every head, layer-major then head then dim. Length L*H*(max_hom_dim+1)*3.
/// Throws std::invalid_argument when a head is missing or a diagram covers
/// fewer dimensions than requested.
FeatureVector assemble_feature_vector(const std::string& sample_id, const std::string& label,
                                      Split split, const HeadDiagrams& heads, int max_hom_dim,
                                      double wasserstein_p = 2.0);

// CSV: header sample_id,label,split,f0000..f{d-1}; values with 17 significant digits.
void write_feature_csv(const std::vector<FeatureVector>& vectors, const std::filesystem::path& path);
std::vector<FeatureVector> read_feature_csv(const std::filesystem::path& path);

// EMBR binary view of feature vectors (values narrowed to f32).
EmbeddingRecords to_embedding_records(const std::vector<FeatureVector>& vectors);
std::vector<FeatureVector> from_embedding_records(const EmbeddingRecords& records);

// Loads vectors from either a feature CSV or an EMBR file, chosen by content.
std::vector<FeatureVector> load_vectors(const std::filesystem::path& path);

}  // namespace tdaood
