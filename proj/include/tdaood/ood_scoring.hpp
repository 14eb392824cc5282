#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tdaood/topo_features.hpp"

namespace tdaood {

using Vectors = std::vector<std::vector<double>>;

inline constexpr double kDefaultRidgeEpsilon = 1e-3;
inline constexpr std::size_t kDefaultNeighbors = 5;
inline constexpr std::string_view kOodLabel = "OOD";

struct Standardizer {
    std::vector<double> mean;
    std::vector<double> std;  // population std; zero columns stored as 1

    std::size_t dim() const { return mean.size(); }
    std::vector<double> apply(std::span<const double> x) const;
    Vectors apply(const Vectors& xs) const;
};

// Per-feature mean and population std over >= 2 equal-length vectors.
Standardizer fit_standardizer(const Vectors& id_validation);

struct GaussianScorerModel {
    std::vector<std::string> classes;
    Vectors class_means;
    std::vector<double> precision;  // row-major d x d, symmetric positive-definite
    double ridge_epsilon = kDefaultRidgeEpsilon;

    std::size_t dim() const { return class_means.empty() ? 0 : class_means.front().size(); }
};

/// Class centroids plus the precision (Sigma + eps * mean(diag Sigma) * I)^-1,
/// where Sigma is the population covariance of all standardized ID vectors.
/// Every class needs >= 2 vectors; an "OOD" label is rejected.
GaussianScorerModel fit_gaussian(const Vectors& standardized, const std::vector<std::string>& labels,
                                 double ridge_epsilon = kDefaultRidgeEpsilon);

// -min_c (z - mu_c)^T P (z - mu_c). Higher is more in-distribution.
double maha_score(std::span<const double> z, const GaussianScorerModel& model);

struct NeighborBank {
    Vectors vectors;
    std::size_t k = kDefaultNeighbors;
};

NeighborBank make_neighbor_bank(Vectors standardized, std::size_t k = kDefaultNeighbors);

// Negative Euclidean distance to the k-th nearest bank vector.
double knn_score(std::span<const double> z, const NeighborBank& bank);

enum class Decision { in, out };
enum class ScorerKind { maha, knn };

std::string_view to_string(Decision decision);
std::string_view to_string(ScorerKind scorer);
ScorerKind parse_scorer(std::string_view text);

// in <=> score >= lambda.
Decision gate(double score, double lambda);

struct ScoredSample {
    std::string sample_id;
    std::string label;
    ScorerKind scorer = ScorerKind::maha;
    double score = 0.0;
    std::optional<Decision> decision;
};

// Everything the `score` step needs, fitted on ID validation vectors.
struct OodModel {
    Standardizer standardizer;
    GaussianScorerModel gaussian;
    NeighborBank bank;
};

OodModel fit_ood_model(const std::vector<FeatureVector>& id_validation,
                       std::size_t k = kDefaultNeighbors,
                       double ridge_epsilon = kDefaultRidgeEpsilon);

double score_vector(const OodModel& model, ScorerKind scorer, std::span<const double> raw);

std::vector<ScoredSample> score_vectors(const OodModel& model, ScorerKind scorer,
                                        const std::vector<FeatureVector>& vectors,
                                        std::optional<double> lambda = std::nullopt);

// Versioned binary sidecar ("OODM", version 1, little-endian f64 payload).
void save_model(const OodModel& model, const std::filesystem::path& path);
OodModel load_model(const std::filesystem::path& path);

// Scores CSV: sample_id,label,scorer,score,decision
void write_scores_csv(const std::vector<ScoredSample>& scores, const std::filesystem::path& path);
std::vector<ScoredSample> read_scores_csv(const std::filesystem::path& path);

}  // namespace tdaood
