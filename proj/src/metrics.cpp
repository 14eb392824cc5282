#include "tdaood/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace tdaood {

namespace {

void check_finite(std::span<const double> scores, const char* what) {
    for (double s : scores) {
        if (!std::isfinite(s)) {
            throw std::invalid_argument(std::string(what) + ": non-finite score");
        }
    }
}

double kth_smallest(std::span<const double> scores, std::size_t k) {
    std::vector<double> copy(scores.begin(), scores.end());
    auto it = copy.begin() + static_cast<std::ptrdiff_t>(k - 1);
    std::nth_element(copy.begin(), it, copy.end());
    return *it;
}

}  // namespace

double auroc(std::span<const double> id_scores, std::span<const double> ood_scores) {
    if (id_scores.empty() || ood_scores.empty()) {
        throw std::invalid_argument("auroc: both score sets must be nonempty");
    }
    check_finite(id_scores, "auroc");
    check_finite(ood_scores, "auroc");
    std::vector<double> ood(ood_scores.begin(), ood_scores.end());
    std::sort(ood.begin(), ood.end());

    // Twice the Mann-Whitney U statistic, kept integral.
    std::uint64_t twice_wins = 0;
    for (double s : id_scores) {
        const auto lower = std::lower_bound(ood.begin(), ood.end(), s);
        const auto upper = std::upper_bound(lower, ood.end(), s);
        twice_wins += 2 * static_cast<std::uint64_t>(lower - ood.begin()) +
                      static_cast<std::uint64_t>(upper - lower);
    }
    const double pairs =
        static_cast<double>(id_scores.size()) * static_cast<double>(ood_scores.size());
    return static_cast<double>(twice_wins) / (2.0 * pairs);
}

double fpr_at_95_tpr(std::span<const double> id_scores, std::span<const double> ood_scores) {
    if (id_scores.size() < kMinIdForFpr95) {
        throw std::invalid_argument("fpr_at_95_tpr: need at least 20 ID scores, got " +
                                    std::to_string(id_scores.size()));
    }
    if (ood_scores.empty()) {
        throw std::invalid_argument("fpr_at_95_tpr: no OOD scores");
    }
    check_finite(id_scores, "fpr_at_95_tpr");
    check_finite(ood_scores, "fpr_at_95_tpr");
    const std::size_t rank = (id_scores.size() + 19) / 20;
    const double lambda = kth_smallest(id_scores, rank);
    const auto accepted = std::count_if(ood_scores.begin(), ood_scores.end(),
                                        [lambda](double s) { return s >= lambda; });
    return static_cast<double>(accepted) / static_cast<double>(ood_scores.size());
}

double calibrate_lambda(std::span<const double> id_scores, double target_tpr) {
    if (id_scores.empty()) {
        throw std::invalid_argument("calibrate_lambda: no ID scores");
    }
    if (!(target_tpr > 0.0 && target_tpr <= 1.0)) {
        throw std::invalid_argument("calibrate_lambda: target must lie in (0, 1]");
    }
    check_finite(id_scores, "calibrate_lambda");
    const auto n = static_cast<double>(id_scores.size());
    auto rejected = static_cast<std::size_t>(std::floor((1.0 - target_tpr) * n + 1e-9));
    while (rejected > 0 && n - static_cast<double>(rejected) < target_tpr * n - 1e-9) {
        --rejected;
    }
    rejected = std::min(rejected, id_scores.size() - 1);
    return kth_smallest(id_scores, rejected + 1);
}

}  // namespace tdaood
