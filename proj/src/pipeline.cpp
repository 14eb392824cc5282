#include "tdaood/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "tdaood/attention_graph.hpp"
#include "tdaood/metrics.hpp"

namespace tdaood {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto comma = s.find(',', start);
        const auto item = trim(s.substr(start, comma == std::string_view::npos ? s.size() - start
                                                                                : comma - start));
        if (!item.empty()) out.push_back(item);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    T out{};
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size()) {
        throw std::invalid_argument("config key '" + key + "': cannot parse '" + value + "'");
    }
    return out;
}

std::string format_double(double v) {
    std::ostringstream out;
    out.precision(std::numeric_limits<double>::max_digits10);
    out << v;
    return out.str();
}

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ',';
        out += items[i];
    }
    return out;
}

void require_file(const std::optional<std::filesystem::path>& path, const std::string& key) {
    if (!path) {
        throw std::invalid_argument("config: '" + key + "' is required");
    }
    if (!std::filesystem::is_regular_file(*path)) {
        throw std::invalid_argument("config: '" + key + "' file not found: " + path->string());
    }
}

// Inputs for one feature source, as feature vectors.
struct SourceVectors {
    std::vector<FeatureVector> validation;
    std::vector<FeatureVector> test;
    std::map<std::string, std::vector<FeatureVector>> ood;
};

AttentionRecords synth_split(const PipelineConfig& config, std::uint64_t stream, std::size_t count,
                             double locality, Split split, const std::string& prefix) {
    const SynthSource& s = config.synth;
    AttentionRecords records;
    records.reserve(count);
    const std::uint64_t base = splitmix64(config.seed ^ splitmix64(stream));
    for (std::size_t i = 0; i < count; ++i) {
        char id[64];
        std::snprintf(id, sizeof id, "%s-%05zu", prefix.c_str(), i);
        SynthOptions options;
        options.n_tokens = s.tokens;
        options.n_layers = s.layers;
        options.n_heads = s.heads;
        options.locality = locality;
        options.sample_id = id;
        options.label = split == Split::ood ? std::string(kOodLabel)
                                            : "class" + std::to_string(i % s.n_classes);
        options.split = split;
        records.push_back(synth_attention(splitmix64(base + i), options));
    }
    return records;
}

std::vector<FeatureVector> features_or_throw(const AttentionRecords& records,
                                             const PipelineConfig& config, const std::string& what) {
    FeatureBatch batch = extract_feature_batch(records, config.features, config.threads);
    if (!batch.failures.empty()) {
        const auto& f = batch.failures.front();
        throw std::runtime_error("stage features (" + what + "), sample '" + f.sample_id +
                                 "': " + f.message + " [" + std::to_string(batch.failures.size()) +
                                 " sample(s) failed]");
    }
    return std::move(batch.vectors);
}

void write_feature_files(const std::vector<FeatureVector>& vectors, const std::filesystem::path& dir,
                         const std::string& stem) {
    write_feature_csv(vectors, dir / (stem + ".csv"));
    write_records(to_embedding_records(vectors), dir / (stem + ".embr"));
}

SourceVectors tda_vectors(const PipelineConfig& config) {
    SourceVectors out;
    if (config.synthetic) {
        const auto& s = config.synth;
        out.validation = features_or_throw(
            synth_split(config, 1, s.n_validation, s.id_locality, Split::validation, "val"), config,
            "validation");
        out.test = features_or_throw(
            synth_split(config, 2, s.n_test, s.id_locality, Split::test, "test"), config, "test");
        out.ood["synthetic"] = features_or_throw(
            synth_split(config, 3, s.n_ood, s.ood_locality, Split::ood, "ood"), config, "ood");
        return out;
    }
    auto load = [&](const std::filesystem::path& path, const std::string& what) {
        AttentionRecords records;
        try {
            records = read_attention_records(path);
        } catch (const std::exception& e) {
            throw std::runtime_error("stage read (" + what + "): " + e.what());
        }
        return features_or_throw(records, config, what);
    };
    out.validation = load(*config.id_validation, "validation");
    out.test = load(*config.id_test, "test");
    for (const auto& [name, path] : config.ood) {
        out.ood[name] = load(path, "ood " + name);
    }
    return out;
}

SourceVectors cls_vectors(const PipelineConfig& config) {
    auto load = [](const std::filesystem::path& path, const std::string& what) {
        try {
            return from_embedding_records(read_embedding_records(path));
        } catch (const std::exception& e) {
            throw std::runtime_error("stage read (cls " + what + "): " + e.what());
        }
    };
    SourceVectors out;
    out.validation = load(*config.cls_id_validation, "validation");
    out.test = load(*config.cls_id_test, "test");
    for (const auto& [name, path] : config.cls_ood) {
        out.ood[name] = load(path, "ood " + name);
    }
    return out;
}

std::vector<double> just_scores(const std::vector<ScoredSample>& scored) {
    std::vector<double> out;
    out.reserve(scored.size());
    for (const auto& s : scored) out.push_back(s.score);
    return out;
}

}  // namespace

AttentionTensorRecord truncate_tokens(const AttentionTensorRecord& record, std::uint32_t max_tokens) {
    if (max_tokens < 2) {
        throw std::invalid_argument("max_tokens must be >= 2");
    }
    if (record.n_tokens <= max_tokens) {
        return record;
    }
    AttentionTensorRecord out = record;
    out.n_tokens = max_tokens;
    const std::size_t n = record.n_tokens;
    const std::size_t m = max_tokens;
    const std::size_t n_maps = std::size_t{record.n_layers} * record.n_heads;
    out.maps.assign(n_maps * m * m, 0.0f);
    for (std::size_t map = 0; map < n_maps; ++map) {
        const float* src = record.maps.data() + map * n * n;
        float* dst = out.maps.data() + map * m * m;
        for (std::size_t i = 0; i < m; ++i) {
            double sum = 0.0;
            for (std::size_t j = 0; j < m; ++j) sum += src[i * n + j];
            for (std::size_t j = 0; j < m; ++j) {
                // A row with no mass inside the block falls back to a uniform row.
                dst[i * m + j] = sum > 0.0 ? static_cast<float>(src[i * n + j] / sum)
                                           : 1.0f / static_cast<float>(m);
            }
        }
    }
    return out;
}

HeadDiagrams head_diagrams(const AttentionTensorRecord& input, const FeatureOptions& options) {
    const AttentionTensorRecord record = truncate_tokens(input, options.max_tokens);
    HeadDiagrams out;
    out.n_layers = record.n_layers;
    out.n_heads = record.n_heads;
    out.diagrams.reserve(out.n_layers * out.n_heads);
    const PersistenceOptions persistence{options.max_hom_dim, options.cap, options.simplex_budget};
    const std::size_t n = record.n_tokens;
    for (std::size_t layer = 0; layer < out.n_layers; ++layer) {
        for (std::size_t head = 0; head < out.n_heads; ++head) {
            const AttentionMap map(n, std::span<const float>(record.map_data(layer, head), n * n));
            out.diagrams.push_back(compute_persistence(to_distance_matrix(map), persistence));
        }
    }
    return out;
}

FeatureVector extract_features(const AttentionTensorRecord& record, const FeatureOptions& options) {
    return assemble_feature_vector(record.sample_id, record.label, record.split,
                                   head_diagrams(record, options), options.max_hom_dim,
                                   options.wasserstein_p);
}

FeatureBatch extract_feature_batch(const AttentionRecords& records, const FeatureOptions& options,
                                   unsigned threads) {
    std::vector<std::optional<FeatureVector>> results(records.size());
    std::vector<std::optional<FeatureFailure>> failures(records.size());
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (std::size_t i = next++; i < records.size(); i = next++) {
            try {
                results[i] = extract_features(records[i], options);
            } catch (const CapacityError& e) {
                failures[i] = FeatureFailure{records[i].sample_id, e.what(), true};
            } catch (const std::exception& e) {
                failures[i] = FeatureFailure{records[i].sample_id, e.what(), false};
            }
        }
    };

    if (threads == 0) {
        threads = std::max(1u, std::thread::hardware_concurrency());
    }
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, records.size())));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }

    FeatureBatch batch;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (results[i]) batch.vectors.push_back(std::move(*results[i]));
        if (failures[i]) batch.failures.push_back(std::move(*failures[i]));
    }
    return batch;
}

std::string_view to_string(FeatureSource source) {
    return source == FeatureSource::tda ? "tda" : "cls";
}

FeatureSource parse_feature_source(std::string_view text) {
    if (text == "tda") return FeatureSource::tda;
    if (text == "cls") return FeatureSource::cls;
    throw std::invalid_argument("unknown feature source '" + std::string(text) + "'");
}

PipelineConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
    PipelineConfig config;
    auto path_of = [&](const std::string& value) {
        std::filesystem::path p(value);
        return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
    };

    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    std::set<std::string> seen;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": expected 'key = value'");
        }
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        if (!seen.insert(key).second) {
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": duplicate key '" + key + "'");
        }

        if (key == "id_train") config.id_train = path_of(value);
        else if (key == "id_validation") config.id_validation = path_of(value);
        else if (key == "id_test") config.id_test = path_of(value);
        else if (key.rfind("ood.", 0) == 0 && key.size() > 4) config.ood[key.substr(4)] = path_of(value);
        else if (key == "cls.id_validation") config.cls_id_validation = path_of(value);
        else if (key == "cls.id_test") config.cls_id_test = path_of(value);
        else if (key.rfind("cls.ood.", 0) == 0 && key.size() > 8) config.cls_ood[key.substr(8)] = path_of(value);
        else if (key == "source") {
            if (value == "synthetic") config.synthetic = true;
            else if (value == "files") config.synthetic = false;
            else throw std::invalid_argument("config key 'source': expected files or synthetic");
        }
        else if (key == "synth.tokens") config.synth.tokens = parse_number<std::uint32_t>(key, value);
        else if (key == "synth.layers") config.synth.layers = parse_number<std::uint16_t>(key, value);
        else if (key == "synth.heads") config.synth.heads = parse_number<std::uint16_t>(key, value);
        else if (key == "synth.id_locality") config.synth.id_locality = parse_number<double>(key, value);
        else if (key == "synth.ood_locality") config.synth.ood_locality = parse_number<double>(key, value);
        else if (key == "synth.n_validation") config.synth.n_validation = parse_number<std::size_t>(key, value);
        else if (key == "synth.n_test") config.synth.n_test = parse_number<std::size_t>(key, value);
        else if (key == "synth.n_ood") config.synth.n_ood = parse_number<std::size_t>(key, value);
        else if (key == "synth.classes") config.synth.n_classes = parse_number<std::size_t>(key, value);
        else if (key == "feature_sources") {
            config.feature_sources.clear();
            for (const auto& item : split_list(value)) config.feature_sources.push_back(parse_feature_source(item));
        }
        else if (key == "scorers") {
            config.scorers.clear();
            for (const auto& item : split_list(value)) config.scorers.push_back(parse_scorer(item));
        }
        else if (key == "max_hom_dim") config.features.max_hom_dim = parse_number<int>(key, value);
        else if (key == "cap") config.features.cap = parse_number<double>(key, value);
        else if (key == "wasserstein_p") config.features.wasserstein_p = parse_number<double>(key, value);
        else if (key == "max_tokens") config.features.max_tokens = parse_number<std::uint32_t>(key, value);
        else if (key == "simplex_budget") config.features.simplex_budget = parse_number<std::uint64_t>(key, value);
        else if (key == "k") config.k = parse_number<std::size_t>(key, value);
        else if (key == "ridge_epsilon") config.ridge_epsilon = parse_number<double>(key, value);
        else if (key == "seed") config.seed = parse_number<std::uint64_t>(key, value);
        else if (key == "threads") config.threads = parse_number<unsigned>(key, value);
        else if (key == "output_dir") config.output_dir = path_of(value);
        else throw std::invalid_argument("config line " + std::to_string(line_no) +
                                         ": unknown key '" + key + "'");
    }
    return config;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open config '" + path.string() + "'");
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str(), path.parent_path());
}

void validate_config(const PipelineConfig& config) {
    const auto& f = config.features;
    if (f.max_hom_dim < 0 || f.max_hom_dim > kMaxHomologyDim) {
        throw std::invalid_argument("config: max_hom_dim must lie in 0..3");
    }
    if (!(f.cap > 0.0)) throw std::invalid_argument("config: cap must be positive");
    if (!(f.wasserstein_p >= 1.0)) throw std::invalid_argument("config: wasserstein_p must be >= 1");
    if (f.max_tokens < 2) throw std::invalid_argument("config: max_tokens must be >= 2");
    if (f.simplex_budget == 0) throw std::invalid_argument("config: simplex_budget must be positive");
    if (config.k == 0) throw std::invalid_argument("config: k must be positive");
    if (!(config.ridge_epsilon > 0.0)) throw std::invalid_argument("config: ridge_epsilon must be positive");
    if (config.feature_sources.empty()) throw std::invalid_argument("config: no feature_sources");
    if (config.scorers.empty()) throw std::invalid_argument("config: no scorers");

    for (FeatureSource source : config.feature_sources) {
        if (source == FeatureSource::tda) {
            if (config.synthetic) {
                const auto& s = config.synth;
                if (s.tokens < 2 || s.layers == 0 || s.heads == 0) {
                    throw std::invalid_argument("config: synthetic shape must have >= 2 tokens and >= 1 layer/head");
                }
                for (double loc : {s.id_locality, s.ood_locality}) {
                    if (!(loc >= 0.0 && loc <= 1.0)) {
                        throw std::invalid_argument("config: synthetic locality must lie in [0,1]");
                    }
                }
                if (s.n_classes == 0 || s.n_validation < 2 * s.n_classes || s.n_test == 0 || s.n_ood == 0) {
                    throw std::invalid_argument("config: synthetic split sizes too small");
                }
                continue;
            }
            if (config.id_train) require_file(config.id_train, "id_train");
            require_file(config.id_validation, "id_validation");
            require_file(config.id_test, "id_test");
            if (config.ood.empty()) throw std::invalid_argument("config: at least one ood.<name> is required");
            for (const auto& [name, path] : config.ood) require_file(path, "ood." + name);
        } else {
            if (config.synthetic) {
                throw std::invalid_argument("config: the cls source needs EMBR files and cannot be synthetic");
            }
            require_file(config.cls_id_validation, "cls.id_validation");
            require_file(config.cls_id_test, "cls.id_test");
            if (config.cls_ood.empty()) throw std::invalid_argument("config: at least one cls.ood.<name> is required");
            for (const auto& [name, path] : config.cls_ood) require_file(path, "cls.ood." + name);
        }
    }
}

std::vector<std::pair<std::string, std::string>> describe_config(const PipelineConfig& c) {
    std::map<std::string, std::string> kv;
    auto put_path = [&](const std::string& key, const std::optional<std::filesystem::path>& p) {
        if (p) kv[key] = p->string();
    };
    put_path("id_train", c.id_train);
    put_path("id_validation", c.id_validation);
    put_path("id_test", c.id_test);
    for (const auto& [name, p] : c.ood) kv["ood." + name] = p.string();
    put_path("cls.id_validation", c.cls_id_validation);
    put_path("cls.id_test", c.cls_id_test);
    for (const auto& [name, p] : c.cls_ood) kv["cls.ood." + name] = p.string();
    kv["source"] = c.synthetic ? "synthetic" : "files";
    if (c.synthetic) {
        kv["synth.tokens"] = std::to_string(c.synth.tokens);
        kv["synth.layers"] = std::to_string(c.synth.layers);
        kv["synth.heads"] = std::to_string(c.synth.heads);
        kv["synth.id_locality"] = format_double(c.synth.id_locality);
        kv["synth.ood_locality"] = format_double(c.synth.ood_locality);
        kv["synth.n_validation"] = std::to_string(c.synth.n_validation);
        kv["synth.n_test"] = std::to_string(c.synth.n_test);
        kv["synth.n_ood"] = std::to_string(c.synth.n_ood);
        kv["synth.classes"] = std::to_string(c.synth.n_classes);
    }
    std::vector<std::string> sources, scorers;
    for (auto s : c.feature_sources) sources.emplace_back(to_string(s));
    for (auto s : c.scorers) scorers.emplace_back(to_string(s));
    kv["feature_sources"] = join(sources);
    kv["scorers"] = join(scorers);
    kv["max_hom_dim"] = std::to_string(c.features.max_hom_dim);
    kv["cap"] = format_double(c.features.cap);
    kv["wasserstein_p"] = format_double(c.features.wasserstein_p);
    kv["max_tokens"] = std::to_string(c.features.max_tokens);
    kv["simplex_budget"] = std::to_string(c.features.simplex_budget);
    kv["k"] = std::to_string(c.k);
    kv["ridge_epsilon"] = format_double(c.ridge_epsilon);
    kv["seed"] = std::to_string(c.seed);
    return {kv.begin(), kv.end()};
}

std::vector<ReportRow> evaluate_scores(FeatureSource source, ScorerKind scorer,
                                       const std::vector<double>& id_scores,
                                       const std::map<std::string, std::vector<double>>& ood_scores) {
    std::vector<ReportRow> rows;
    for (const auto& [name, scores] : ood_scores) {
        ReportRow row;
        row.feature_source = source;
        row.scorer = scorer;
        row.ood_dataset = name;
        row.auroc = auroc(id_scores, scores);
        row.fpr95 = fpr_at_95_tpr(id_scores, scores);
        row.n_id = id_scores.size();
        row.n_ood = scores.size();
        rows.push_back(std::move(row));
    }
    return rows;
}

EvalReport run_pipeline(const PipelineConfig& config) {
    validate_config(config);
    if (config.output_dir) {
        std::filesystem::create_directories(*config.output_dir);
    }

    EvalReport report;
    report.seed = config.seed;
    report.config = describe_config(config);

    for (FeatureSource source : config.feature_sources) {
        const std::string src(to_string(source));
        SourceVectors vectors =
            source == FeatureSource::tda ? tda_vectors(config) : cls_vectors(config);

        if (config.id_train && source == FeatureSource::tda) {
            std::set<std::string> classes;
            for (const auto& r : read_attention_records(*config.id_train)) classes.insert(r.label);
            for (const auto& v : vectors.validation) {
                if (!classes.count(v.label)) {
                    throw std::runtime_error("stage fit: validation sample '" + v.sample_id +
                                             "' has label '" + v.label + "' absent from id_train");
                }
            }
        }

        if (config.output_dir && source == FeatureSource::tda) {
            write_feature_files(vectors.validation, *config.output_dir, "features_tda_validation");
            write_feature_files(vectors.test, *config.output_dir, "features_tda_test");
            for (const auto& [name, v] : vectors.ood) {
                write_feature_files(v, *config.output_dir, "features_tda_ood_" + name);
            }
        }

        OodModel model;
        try {
            model = fit_ood_model(vectors.validation, config.k, config.ridge_epsilon);
        } catch (const std::exception& e) {
            throw std::runtime_error("stage fit (" + src + "): " + e.what());
        }

        for (ScorerKind scorer : config.scorers) {
            const std::string name(to_string(scorer));
            const auto validation = score_vectors(model, scorer, vectors.validation);
            const double lambda = calibrate_lambda(just_scores(validation));
            report.thresholds.push_back({source, scorer, lambda});

            const auto id_test = score_vectors(model, scorer, vectors.test, lambda);
            std::map<std::string, std::vector<double>> ood_scores;
            for (const auto& [set, v] : vectors.ood) {
                const auto scored = score_vectors(model, scorer, v, lambda);
                ood_scores[set] = just_scores(scored);
                if (config.output_dir) {
                    write_scores_csv(scored, *config.output_dir /
                                                 ("scores_" + src + "_" + name + "_ood_" + set + ".csv"));
                }
            }
            if (config.output_dir) {
                write_scores_csv(id_test, *config.output_dir / ("scores_" + src + "_" + name + "_test.csv"));
            }
            try {
                auto rows = evaluate_scores(source, scorer, just_scores(id_test), ood_scores);
                report.rows.insert(report.rows.end(), rows.begin(), rows.end());
            } catch (const std::exception& e) {
                throw std::runtime_error("stage evaluate (" + src + "/" + name + "): " + e.what());
            }
        }
    }

    if (config.output_dir) {
        std::ofstream csv(*config.output_dir / "report.csv", std::ios::trunc);
        write_report_csv(report, csv);
        std::ofstream table(*config.output_dir / "report.txt", std::ios::trunc);
        write_report_table(report, table);
        if (!csv || !table) {
            throw std::runtime_error("failed to write report files in " + config.output_dir->string());
        }
    }
    return report;
}

void write_report_csv(const EvalReport& report, std::ostream& out) {
    const auto precision = out.precision(std::numeric_limits<double>::max_digits10);
    out << "feature_source,scorer,ood_dataset,auroc,fpr95,n_id,n_ood\n";
    for (const auto& r : report.rows) {
        out << to_string(r.feature_source) << ',' << to_string(r.scorer) << ',' << r.ood_dataset
            << ',' << r.auroc << ',' << r.fpr95 << ',' << r.n_id << ',' << r.n_ood << '\n';
    }
    out.precision(precision);
}

void write_report_table(const EvalReport& report, std::ostream& out) {
    std::set<std::string> datasets;
    for (const auto& r : report.rows) datasets.insert(r.ood_dataset);

    out << "OOD detection report (seed " << report.seed << ")\n\n";
    out << std::left << std::setw(10) << "features" << std::setw(8) << "scorer";
    for (const auto& d : datasets) {
        out << std::setw(22) << (d + " AUROC/FPR95");
    }
    out << '\n';

    std::vector<std::pair<FeatureSource, ScorerKind>> keys;
    for (const auto& r : report.rows) {
        const auto key = std::make_pair(r.feature_source, r.scorer);
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
    }
    for (const auto& [source, scorer] : keys) {
        out << std::setw(10) << to_string(source) << std::setw(8) << to_string(scorer);
        for (const auto& d : datasets) {
            std::string cell = "-";
            for (const auto& r : report.rows) {
                if (r.feature_source == source && r.scorer == scorer && r.ood_dataset == d) {
                    char buf[64];
                    std::snprintf(buf, sizeof buf, "%.3f / %.3f", r.auroc, r.fpr95);
                    cell = buf;
                }
            }
            out << std::setw(22) << cell;
        }
        out << '\n';
    }

    out << "\nthresholds (ID validation, 95% TPR)\n";
    for (const auto& t : report.thresholds) {
        out << "  " << to_string(t.feature_source) << '/' << to_string(t.scorer) << " lambda = "
            << format_double(t.lambda) << '\n';
    }
    out << "\nconfig\n";
    for (const auto& [key, value] : report.config) {
        out << "  " << key << " = " << value << '\n';
    }
    out << std::right;
}

}  // namespace tdaood
