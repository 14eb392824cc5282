#include "tdaood/ood_scoring.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace tdaood {

namespace {

constexpr char kModelMagic[4] = {'O', 'O', 'D', 'M'};
constexpr std::uint8_t kModelVersion = 1;

void require_dim(std::size_t got, std::size_t want, const char* what) {
    if (got != want) {
        throw std::invalid_argument(std::string(what) + ": dimension mismatch (" +
                                    std::to_string(got) + " vs " + std::to_string(want) + ")");
    }
}

class SidecarWriter {
public:
    explicit SidecarWriter(const std::filesystem::path& path)
        : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
        if (!out_) {
            throw std::runtime_error("cannot open '" + path.string() + "' for writing");
        }
    }
    template <typename T>
    void put(T v) {
        out_.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
    void doubles(const std::vector<double>& v) {
        out_.write(reinterpret_cast<const char*>(v.data()),
                   static_cast<std::streamsize>(v.size() * sizeof(double)));
    }
    void string(const std::string& s) {
        if (s.size() > 0xFFFF) {
            throw std::invalid_argument("label longer than 65535 bytes");
        }
        put(static_cast<std::uint16_t>(s.size()));
        out_.write(s.data(), static_cast<std::streamsize>(s.size()));
    }
    void finish() {
        out_.flush();
        if (!out_) {
            throw std::runtime_error("write failed for '" + path_.string() + "'");
        }
    }

private:
    std::filesystem::path path_;
    std::ofstream out_;
};

class SidecarReader {
public:
    explicit SidecarReader(const std::filesystem::path& path) : path_(path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            throw std::runtime_error("cannot open '" + path.string() + "'");
        }
        bytes_.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    }
    template <typename T>
    T get() {
        need(sizeof(T));
        T v;
        std::memcpy(&v, bytes_.data() + pos_, sizeof v);
        pos_ += sizeof v;
        return v;
    }
    std::vector<double> doubles(std::size_t n) {
        if (n > (bytes_.size() - pos_) / sizeof(double)) {
            fail("truncated model file");
        }
        std::vector<double> v(n);
        std::memcpy(v.data(), bytes_.data() + pos_, n * sizeof(double));
        pos_ += n * sizeof(double);
        return v;
    }
    std::string string() {
        const auto len = get<std::uint16_t>();
        need(len);
        std::string s(bytes_.data() + pos_, len);
        pos_ += len;
        return s;
    }
    bool at_end() const { return pos_ == bytes_.size(); }
    [[noreturn]] void fail(const std::string& what) const {
        throw std::runtime_error(path_.string() + ": " + what);
    }

private:
    void need(std::size_t n) const {
        if (n > bytes_.size() - pos_) {
            fail("truncated model file");
        }
    }
    std::filesystem::path path_;
    std::vector<char> bytes_;
    std::size_t pos_ = 0;
};

double parse_double(const std::string& text, const std::string& context) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw std::runtime_error(context + ": cannot parse number '" + text + "'");
    }
    return value;
}

}  // namespace

std::vector<double> Standardizer::apply(std::span<const double> x) const {
    require_dim(x.size(), dim(), "standardize");
    std::vector<double> z(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        z[i] = (x[i] - mean[i]) / std[i];
    }
    return z;
}

Vectors Standardizer::apply(const Vectors& xs) const {
    Vectors out;
    out.reserve(xs.size());
    for (const auto& x : xs) {
        out.push_back(apply(x));
    }
    return out;
}

Standardizer fit_standardizer(const Vectors& id_validation) {
    if (id_validation.size() < 2) {
        throw std::invalid_argument("fit_standardizer: need at least 2 vectors, got " +
                                    std::to_string(id_validation.size()));
    }
    const std::size_t d = id_validation.front().size();
    if (d == 0) {
        throw std::invalid_argument("fit_standardizer: empty vectors");
    }
    Standardizer s;
    s.mean.assign(d, 0.0);
    s.std.assign(d, 0.0);
    for (const auto& x : id_validation) {
        require_dim(x.size(), d, "fit_standardizer");
        for (std::size_t i = 0; i < d; ++i) {
            s.mean[i] += x[i];
        }
    }
    const auto n = static_cast<double>(id_validation.size());
    for (double& m : s.mean) {
        m /= n;
    }
    for (const auto& x : id_validation) {
        for (std::size_t i = 0; i < d; ++i) {
            const double c = x[i] - s.mean[i];
            s.std[i] += c * c;
        }
    }
    for (double& v : s.std) {
        v = std::sqrt(v / n);
        if (!(v > 0.0)) {
            v = 1.0;
        }
    }
    return s;
}

GaussianScorerModel fit_gaussian(const Vectors& standardized, const std::vector<std::string>& labels,
                                 double ridge_epsilon) {
    if (standardized.size() != labels.size()) {
        throw std::invalid_argument("fit_gaussian: vectors and labels differ in count");
    }
    if (standardized.empty()) {
        throw std::invalid_argument("fit_gaussian: no vectors");
    }
    if (!(ridge_epsilon > 0.0)) {
        throw std::invalid_argument("fit_gaussian: ridge epsilon must be positive");
    }
    const std::size_t d = standardized.front().size();

    std::map<std::string, std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == kOodLabel) {
            throw std::invalid_argument("fit_gaussian: OOD-labelled vector in the fitting set");
        }
        require_dim(standardized[i].size(), d, "fit_gaussian");
        members[labels[i]].push_back(i);
    }

    GaussianScorerModel model;
    model.ridge_epsilon = ridge_epsilon;
    for (const auto& [label, rows] : members) {
        if (rows.size() < 2) {
            throw std::invalid_argument("fit_gaussian: class '" + label + "' has fewer than 2 vectors");
        }
        std::vector<double> mu(d, 0.0);
        for (std::size_t r : rows) {
            for (std::size_t i = 0; i < d; ++i) {
                mu[i] += standardized[r][i];
            }
        }
        for (double& m : mu) {
            m /= static_cast<double>(rows.size());
        }
        model.classes.push_back(label);
        model.class_means.push_back(std::move(mu));
    }

    const auto n = static_cast<Eigen::Index>(standardized.size());
    Eigen::MatrixXd data(n, static_cast<Eigen::Index>(d));
    for (Eigen::Index r = 0; r < n; ++r) {
        data.row(r) = Eigen::Map<const Eigen::RowVectorXd>(standardized[r].data(),
                                                           static_cast<Eigen::Index>(d));
    }
    const Eigen::RowVectorXd centre = data.colwise().mean();
    data.rowwise() -= centre;
    Eigen::MatrixXd sigma = (data.transpose() * data) / static_cast<double>(n);

    double scale = sigma.diagonal().mean();
    if (!(scale > 0.0)) {
        scale = 1.0;
    }
    sigma.diagonal().array() += ridge_epsilon * scale;

    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success) {
        throw std::runtime_error("fit_gaussian: regularized covariance is not positive-definite");
    }
    const Eigen::Index dd = static_cast<Eigen::Index>(d);
    Eigen::MatrixXd precision = llt.solve(Eigen::MatrixXd::Identity(dd, dd));
    precision = (0.5 * (precision + precision.transpose())).eval();

    model.precision.resize(d * d);
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        model.precision.data(), dd, dd) = precision;
    return model;
}

double maha_score(std::span<const double> z, const GaussianScorerModel& model) {
    const std::size_t d = model.dim();
    require_dim(z.size(), d, "maha_score");
    const auto dd = static_cast<Eigen::Index>(d);
    const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
        precision(model.precision.data(), dd, dd);
    const Eigen::Map<const Eigen::VectorXd> x(z.data(), dd);

    double best = std::numeric_limits<double>::infinity();
    for (const auto& mu : model.class_means) {
        const Eigen::VectorXd diff = x - Eigen::Map<const Eigen::VectorXd>(mu.data(), dd);
        best = std::min(best, diff.dot(precision * diff));
    }
    return -best;
}

NeighborBank make_neighbor_bank(Vectors standardized, std::size_t k) {
    if (k == 0) {
        throw std::invalid_argument("neighbor bank: k must be positive");
    }
    if (standardized.size() < k) {
        throw std::invalid_argument("neighbor bank: k=" + std::to_string(k) + " exceeds bank size " +
                                    std::to_string(standardized.size()));
    }
    for (const auto& v : standardized) {
        require_dim(v.size(), standardized.front().size(), "neighbor bank");
    }
    return {std::move(standardized), k};
}

double knn_score(std::span<const double> z, const NeighborBank& bank) {
    if (bank.k == 0 || bank.k > bank.vectors.size()) {
        throw std::invalid_argument("knn_score: k=" + std::to_string(bank.k) +
                                    " exceeds bank size " + std::to_string(bank.vectors.size()));
    }
    std::vector<double> squared;
    squared.reserve(bank.vectors.size());
    for (const auto& b : bank.vectors) {
        require_dim(z.size(), b.size(), "knn_score");
        double s = 0.0;
        for (std::size_t i = 0; i < b.size(); ++i) {
            const double diff = z[i] - b[i];
            s += diff * diff;
        }
        squared.push_back(s);
    }
    auto kth = squared.begin() + static_cast<std::ptrdiff_t>(bank.k - 1);
    std::nth_element(squared.begin(), kth, squared.end());
    return -std::sqrt(*kth);
}

std::string_view to_string(Decision decision) {
    return decision == Decision::in ? "in" : "out";
}

std::string_view to_string(ScorerKind scorer) {
    return scorer == ScorerKind::maha ? "maha" : "knn";
}

ScorerKind parse_scorer(std::string_view text) {
    if (text == "maha") return ScorerKind::maha;
    if (text == "knn") return ScorerKind::knn;
    throw std::invalid_argument("unknown scorer '" + std::string(text) + "'");
}

Decision gate(double score, double lambda) {
    return score >= lambda ? Decision::in : Decision::out;
}

OodModel fit_ood_model(const std::vector<FeatureVector>& id_validation, std::size_t k,
                       double ridge_epsilon) {
    Vectors raw;
    std::vector<std::string> labels;
    raw.reserve(id_validation.size());
    for (const auto& v : id_validation) {
        raw.push_back(v.values);
        labels.push_back(v.label);
    }
    OodModel model;
    model.standardizer = fit_standardizer(raw);
    Vectors z = model.standardizer.apply(raw);
    model.gaussian = fit_gaussian(z, labels, ridge_epsilon);
    model.bank = make_neighbor_bank(std::move(z), k);
    return model;
}

double score_vector(const OodModel& model, ScorerKind scorer, std::span<const double> raw) {
    const std::vector<double> z = model.standardizer.apply(raw);
    return scorer == ScorerKind::maha ? maha_score(z, model.gaussian) : knn_score(z, model.bank);
}

std::vector<ScoredSample> score_vectors(const OodModel& model, ScorerKind scorer,
                                        const std::vector<FeatureVector>& vectors,
                                        std::optional<double> lambda) {
    std::vector<ScoredSample> out;
    out.reserve(vectors.size());
    for (const auto& v : vectors) {
        ScoredSample s{v.sample_id, v.label, scorer, score_vector(model, scorer, v.values), {}};
        if (lambda) {
            s.decision = gate(s.score, *lambda);
        }
        out.push_back(std::move(s));
    }
    return out;
}

void save_model(const OodModel& model, const std::filesystem::path& path) {
    const std::size_t d = model.standardizer.dim();
    SidecarWriter out(path);
    for (char c : kModelMagic) out.put(c);
    out.put(kModelVersion);
    out.put(std::uint8_t{0x01});
    out.put(static_cast<std::uint32_t>(d));
    out.doubles(model.standardizer.mean);
    out.doubles(model.standardizer.std);
    out.put(static_cast<std::uint32_t>(model.gaussian.classes.size()));
    for (std::size_t c = 0; c < model.gaussian.classes.size(); ++c) {
        out.string(model.gaussian.classes[c]);
        out.doubles(model.gaussian.class_means[c]);
    }
    out.doubles(model.gaussian.precision);
    out.put(model.gaussian.ridge_epsilon);
    out.put(static_cast<std::uint32_t>(model.bank.k));
    out.put(static_cast<std::uint32_t>(model.bank.vectors.size()));
    for (const auto& v : model.bank.vectors) {
        out.doubles(v);
    }
    out.finish();
}

OodModel load_model(const std::filesystem::path& path) {
    SidecarReader in(path);
    char magic[4];
    for (char& c : magic) c = in.get<char>();
    if (std::memcmp(magic, kModelMagic, 4) != 0) {
        in.fail("bad magic: not an OOD model sidecar");
    }
    if (in.get<std::uint8_t>() != kModelVersion) {
        in.fail("unsupported model version");
    }
    if (in.get<std::uint8_t>() != 0x01) {
        in.fail("unsupported endianness flag");
    }
    OodModel model;
    const std::size_t d = in.get<std::uint32_t>();
    model.standardizer.mean = in.doubles(d);
    model.standardizer.std = in.doubles(d);
    const std::size_t n_classes = in.get<std::uint32_t>();
    for (std::size_t c = 0; c < n_classes; ++c) {
        model.gaussian.classes.push_back(in.string());
        model.gaussian.class_means.push_back(in.doubles(d));
    }
    model.gaussian.precision = in.doubles(d * d);
    model.gaussian.ridge_epsilon = in.get<double>();
    model.bank.k = in.get<std::uint32_t>();
    const std::size_t bank_size = in.get<std::uint32_t>();
    model.bank.vectors.reserve(bank_size);
    for (std::size_t i = 0; i < bank_size; ++i) {
        model.bank.vectors.push_back(in.doubles(d));
    }
    if (!in.at_end()) {
        in.fail("trailing bytes after model payload");
    }
    return model;
}

void write_scores_csv(const std::vector<ScoredSample>& scores, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    }
    out.precision(std::numeric_limits<double>::max_digits10);
    out << "sample_id,label,scorer,score,decision\n";
    for (const auto& s : scores) {
        out << s.sample_id << ',' << s.label << ',' << to_string(s.scorer) << ',' << s.score << ','
            << (s.decision ? to_string(*s.decision) : std::string_view{}) << '\n';
    }
    if (!out) {
        throw std::runtime_error("write failed for '" + path.string() + "'");
    }
}

std::vector<ScoredSample> read_scores_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open '" + path.string() + "'");
    }
    std::string line;
    if (!std::getline(in, line) || line != "sample_id,label,scorer,score,decision") {
        throw std::runtime_error(path.string() + ": not a scores CSV");
    }
    std::vector<ScoredSample> scores;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        const std::string context = path.string() + ":" + std::to_string(line_no);
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            fields.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (fields.size() != 5) {
            throw std::runtime_error(context + ": expected 5 fields");
        }
        ScoredSample s;
        s.sample_id = fields[0];
        s.label = fields[1];
        s.scorer = parse_scorer(fields[2]);
        s.score = parse_double(fields[3], context);
        if (fields[4] == "in") {
            s.decision = Decision::in;
        } else if (fields[4] == "out") {
            s.decision = Decision::out;
        } else if (!fields[4].empty()) {
            throw std::runtime_error(context + ": bad decision '" + fields[4] + "'");
        }
        scores.push_back(std::move(s));
    }
    return scores;
}

}  // namespace tdaood
