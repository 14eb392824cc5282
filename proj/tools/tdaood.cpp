// Command-line front end: synth, features, fit, score, evaluate, run.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tdaood/metrics.hpp"
#include "tdaood/ood_scoring.hpp"
#include "tdaood/pipeline.hpp"
#include "tdaood/record_io.hpp"
#include "tdaood/topo_features.hpp"
#include "tdaood/vr_persistence.hpp"

namespace {

using namespace tdaood;

struct SynthArgs {
    std::uint64_t seed = 0;
    std::size_t count = 10;
    std::uint32_t tokens = 16;
    std::uint16_t layers = 2;
    std::uint16_t heads = 2;
    double locality = 0.5;
    std::string split = "train";
    std::string label = "class";
    std::size_t classes = 1;
    std::string prefix = "s";
    std::string out;
};

int run_synth(const SynthArgs& a) {
    AttentionRecords records;
    const Split split = parse_split(a.split);
    for (std::size_t i = 0; i < a.count; ++i) {
        SynthOptions o;
        o.n_tokens = a.tokens;
        o.n_layers = a.layers;
        o.n_heads = a.heads;
        o.locality = a.locality;
        o.sample_id = a.prefix + "-" + std::to_string(i);
        o.label = split == Split::ood ? std::string(kOodLabel)
                  : a.classes > 1    ? a.label + std::to_string(i % a.classes)
                                     : a.label;
        o.split = split;
        records.push_back(synth_attention(a.seed * 1000003ull + i, o));
    }
    write_records(records, a.out);
    std::cout << "wrote " << records.size() << " records to " << a.out << '\n';
    return 0;
}

struct FeaturesArgs {
    std::string in;
    std::string out_csv;
    std::string out_bin;
    std::string dump_diagrams;
    FeatureOptions options;
    unsigned threads = 0;
};

int run_features(const FeaturesArgs& a) {
    const AttentionRecords records = read_attention_records(a.in);
    FeatureBatch batch = extract_feature_batch(records, a.options, a.threads);
    for (const auto& f : batch.failures) {
        std::cerr << (f.capacity ? "capacity: " : "error: ") << "sample '" << f.sample_id
                  << "': " << f.message << '\n';
    }
    if (batch.vectors.empty()) {
        std::cerr << "no feature vectors produced\n";
        return 1;
    }
    if (!a.out_csv.empty()) write_feature_csv(batch.vectors, a.out_csv);
    if (!a.out_bin.empty()) write_records(to_embedding_records(batch.vectors), a.out_bin);
    if (!a.dump_diagrams.empty()) {
        std::ofstream dump(a.dump_diagrams, std::ios::trunc);
        write_diagram_csv_header(dump);
        for (const auto& r : records) {
            try {
                const HeadDiagrams heads = head_diagrams(r, a.options);
                for (std::size_t m = 0; m < heads.diagrams.size(); ++m) {
                    write_diagram_csv(dump, r.sample_id, m / heads.n_heads, m % heads.n_heads,
                                      heads.diagrams[m]);
                }
            } catch (const std::exception&) {
                // already reported above
            }
        }
    }
    std::cout << "extracted " << batch.vectors.size() << " vectors ("
              << batch.vectors.front().values.size() << " features), " << batch.failures.size()
              << " failed\n";
    return batch.failures.empty() ? 0 : 2;
}

int run_fit(const std::string& in, const std::string& out, std::size_t k, double epsilon) {
    const auto vectors = load_vectors(in);
    save_model(fit_ood_model(vectors, k, epsilon), out);
    std::cout << "fitted on " << vectors.size() << " vectors, model written to " << out << '\n';
    return 0;
}

int run_score(const std::string& in, const std::string& model_path, const std::string& scorer,
              std::optional<double> lambda, const std::string& out) {
    const OodModel model = load_model(model_path);
    const auto scored = score_vectors(model, parse_scorer(scorer), load_vectors(in), lambda);
    write_scores_csv(scored, out);
    std::cout << "scored " << scored.size() << " vectors with " << scorer << '\n';
    return 0;
}

int run_evaluate(const std::string& id_path, const std::vector<std::string>& ood_specs,
                 const std::string& source, const std::string& out_csv) {
    const auto id = read_scores_csv(id_path);
    std::map<ScorerKind, std::vector<double>> id_scores;
    for (const auto& s : id) id_scores[s.scorer].push_back(s.score);

    std::map<ScorerKind, std::map<std::string, std::vector<double>>> ood_scores;
    for (const auto& spec : ood_specs) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("--ood expects name=path, got '" + spec + "'");
        }
        for (const auto& s : read_scores_csv(spec.substr(eq + 1))) {
            ood_scores[s.scorer][spec.substr(0, eq)].push_back(s.score);
        }
    }

    EvalReport report;
    for (const auto& [scorer, scores] : id_scores) {
        auto it = ood_scores.find(scorer);
        if (it == ood_scores.end()) {
            throw std::invalid_argument("no OOD scores for scorer " + std::string(to_string(scorer)));
        }
        auto rows = evaluate_scores(parse_feature_source(source), scorer, scores, it->second);
        report.rows.insert(report.rows.end(), rows.begin(), rows.end());
    }
    write_report_table(report, std::cout);
    if (!out_csv.empty()) {
        std::ofstream csv(out_csv, std::ios::trunc);
        write_report_csv(report, csv);
    }
    return 0;
}

int run_config(const std::string& path, std::optional<std::uint64_t> seed,
               const std::string& output_dir) {
    PipelineConfig config = load_config(path);
    if (seed) config.seed = *seed;
    if (!output_dir.empty()) config.output_dir = output_dir;
    const EvalReport report = run_pipeline(config);
    write_report_table(report, std::cout);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Topological OOD detection over transformer attention maps"};
    app.require_subcommand(1);

    SynthArgs synth;
    auto* synth_cmd = app.add_subcommand("synth", "Generate synthetic attention records");
    synth_cmd->add_option("--seed", synth.seed);
    synth_cmd->add_option("--count", synth.count);
    synth_cmd->add_option("--tokens", synth.tokens);
    synth_cmd->add_option("--layers", synth.layers);
    synth_cmd->add_option("--heads", synth.heads);
    synth_cmd->add_option("--locality", synth.locality)->check(CLI::Range(0.0, 1.0));
    synth_cmd->add_option("--split", synth.split)
        ->check(CLI::IsMember({"train", "validation", "test", "ood"}));
    synth_cmd->add_option("--label", synth.label, "Class label (prefix when --classes > 1)");
    synth_cmd->add_option("--classes", synth.classes)->check(CLI::PositiveNumber);
    synth_cmd->add_option("--prefix", synth.prefix, "sample_id prefix");
    synth_cmd->add_option("-o,--out", synth.out)->required();

    FeaturesArgs features;
    auto* features_cmd = app.add_subcommand("features", "Attention records to feature vectors");
    features_cmd->add_option("-i,--in", features.in)->required()->check(CLI::ExistingFile);
    features_cmd->add_option("--csv", features.out_csv, "Feature CSV output");
    features_cmd->add_option("--bin", features.out_bin, "Feature EMBR output");
    features_cmd->add_option("--dump-diagrams", features.dump_diagrams, "Diagram CSV output");
    features_cmd->add_option("--max-hom-dim", features.options.max_hom_dim)->check(CLI::Range(0, 3));
    features_cmd->add_option("--cap", features.options.cap);
    features_cmd->add_option("--wasserstein-p", features.options.wasserstein_p);
    features_cmd->add_option("--max-tokens", features.options.max_tokens);
    features_cmd->add_option("--simplex-budget", features.options.simplex_budget);
    features_cmd->add_option("--threads", features.threads);

    std::string fit_in, fit_out;
    std::size_t fit_k = kDefaultNeighbors;
    double fit_eps = kDefaultRidgeEpsilon;
    auto* fit_cmd = app.add_subcommand("fit", "Fit standardizer and scorers on ID validation vectors");
    fit_cmd->add_option("-i,--in", fit_in)->required()->check(CLI::ExistingFile);
    fit_cmd->add_option("-o,--out", fit_out)->required();
    fit_cmd->add_option("-k", fit_k);
    fit_cmd->add_option("--epsilon", fit_eps);

    std::string score_in, score_model, score_scorer = "maha", score_out;
    std::optional<double> score_lambda;
    auto* score_cmd = app.add_subcommand("score", "Score vectors against a fitted model");
    score_cmd->add_option("-i,--in", score_in)->required()->check(CLI::ExistingFile);
    score_cmd->add_option("-m,--model", score_model)->required()->check(CLI::ExistingFile);
    score_cmd->add_option("-s,--scorer", score_scorer)->check(CLI::IsMember({"maha", "knn"}));
    score_cmd->add_option("--lambda", score_lambda, "Apply the gate at this threshold");
    score_cmd->add_option("-o,--out", score_out)->required();

    std::string eval_id, eval_source = "tda", eval_out;
    std::vector<std::string> eval_ood;
    auto* eval_cmd = app.add_subcommand("evaluate", "AUROC/FPR95 from score files");
    eval_cmd->add_option("--id", eval_id, "ID test scores CSV")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--ood", eval_ood, "name=scores.csv (repeatable)")->required();
    eval_cmd->add_option("--source", eval_source)->check(CLI::IsMember({"tda", "cls"}));
    eval_cmd->add_option("--csv", eval_out, "Report CSV output");

    std::string run_path, run_output;
    std::optional<std::uint64_t> run_seed;
    auto* run_cmd = app.add_subcommand("run", "End-to-end pipeline from a config file");
    run_cmd->add_option("-c,--config", run_path)->required()->check(CLI::ExistingFile);
    run_cmd->add_option("--seed", run_seed, "Overrides the config seed");
    run_cmd->add_option("--output-dir", run_output, "Overrides the config output_dir");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*synth_cmd) return run_synth(synth);
        if (*features_cmd) return run_features(features);
        if (*fit_cmd) return run_fit(fit_in, fit_out, fit_k, fit_eps);
        if (*score_cmd) return run_score(score_in, score_model, score_scorer, score_lambda, score_out);
        if (*eval_cmd) return run_evaluate(eval_id, eval_ood, eval_source, eval_out);
        if (*run_cmd) return run_config(run_path, run_seed, run_output);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
