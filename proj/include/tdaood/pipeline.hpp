#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tdaood/ood_scoring.hpp"
#include "tdaood/record_io.hpp"
#include "tdaood/topo_features.hpp"
#include "tdaood/vr_persistence.hpp"

namespace tdaood {

struct FeatureOptions {
    int max_hom_dim = kMaxHomologyDim;
    double cap = 1.0;
    double wasserstein_p = 2.0;
    std::uint32_t max_tokens = 64;
    std::uint64_t simplex_budget = kDefaultSimplexBudget;
};

// Leading max_tokens x max_tokens block of each map, rows renormalized.
AttentionTensorRecord truncate_tokens(const AttentionTensorRecord& record, std::uint32_t max_tokens);

// Diagrams for every head of one record (after truncation).
HeadDiagrams head_diagrams(const AttentionTensorRecord& record, const FeatureOptions& options);

FeatureVector extract_features(const AttentionTensorRecord& record, const FeatureOptions& options);

struct FeatureFailure {
    std::string sample_id;
    std::string message;
    bool capacity = false;
};

struct FeatureBatch {
    std::vector<FeatureVector> vectors;  // input order, failures omitted
    std::vector<FeatureFailure> failures;
};

// Extracts features on `threads` workers (0 = hardware concurrency). Output order is input order.
FeatureBatch extract_feature_batch(const AttentionRecords& records, const FeatureOptions& options,
                                   unsigned threads = 0);

enum class FeatureSource { tda, cls };
std::string_view to_string(FeatureSource source);
FeatureSource parse_feature_source(std::string_view text);

struct SynthSource {
    std::uint32_t tokens = 16;
    std::uint16_t layers = 2;
    std::uint16_t heads = 2;
    double id_locality = 0.8;
    double ood_locality = 0.1;
    std::size_t n_validation = 200;
    std::size_t n_test = 200;
    std::size_t n_ood = 200;
    std::size_t n_classes = 2;
};

struct PipelineConfig {
    // Record inputs. ood/cls_ood map a dataset name to its file.
    std::optional<std::filesystem::path> id_train;
    std::optional<std::filesystem::path> id_validation;
    std::optional<std::filesystem::path> id_test;
    std::map<std::string, std::filesystem::path> ood;
    std::optional<std::filesystem::path> cls_id_validation;
    std::optional<std::filesystem::path> cls_id_test;
    std::map<std::string, std::filesystem::path> cls_ood;

    bool synthetic = false;
    SynthSource synth;

    std::vector<FeatureSource> feature_sources{FeatureSource::tda};
    std::vector<ScorerKind> scorers{ScorerKind::knn, ScorerKind::maha};
    FeatureOptions features;
    std::size_t k = kDefaultNeighbors;
    double ridge_epsilon = kDefaultRidgeEpsilon;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    std::optional<std::filesystem::path> output_dir;
};

/// Parses the UTF-8 `key = value` config format; '#' starts a comment.
/// Relative paths resolve against `base_dir`. Unknown keys are errors.
PipelineConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
PipelineConfig load_config(const std::filesystem::path& path);

// Throws if a referenced file is missing or a numeric field is out of range.
void validate_config(const PipelineConfig& config);

// Resolved configuration as sorted key = value lines.
std::vector<std::pair<std::string, std::string>> describe_config(const PipelineConfig& config);

struct ReportRow {
    FeatureSource feature_source = FeatureSource::tda;
    ScorerKind scorer = ScorerKind::knn;
    std::string ood_dataset;
    double auroc = 0.0;
    double fpr95 = 0.0;
    std::size_t n_id = 0;
    std::size_t n_ood = 0;
};

struct CalibratedThreshold {
    FeatureSource feature_source = FeatureSource::tda;
    ScorerKind scorer = ScorerKind::knn;
    double lambda = 0.0;  // from ID validation scores at 95% TPR
};

struct EvalReport {
    std::vector<ReportRow> rows;
    std::vector<CalibratedThreshold> thresholds;
    std::vector<std::pair<std::string, std::string>> config;
    std::uint64_t seed = 0;
};

// One row per OOD dataset for a single scorer.
std::vector<ReportRow> evaluate_scores(FeatureSource source, ScorerKind scorer,
                                       const std::vector<double>& id_scores,
                                       const std::map<std::string, std::vector<double>>& ood_scores);

/// Loads or synthesizes inputs, extracts features, fits scorers on ID
/// validation, scores ID test and every OOD set, and returns the report.
/// When config.output_dir is set, feature files, score files and the report
/// are written there. Any failure aborts with sample/stage context.
EvalReport run_pipeline(const PipelineConfig& config);

void write_report_csv(const EvalReport& report, std::ostream& out);
void write_report_table(const EvalReport& report, std::ostream& out);

}  // namespace tdaood
