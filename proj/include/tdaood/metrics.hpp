#pragma once

#include <cstddef>
#include <span>

namespace tdaood {

inline constexpr std::size_t kMinIdForFpr95 = 20;

// P(id score > ood score) with ties counted half; ID is the positive class.
double auroc(std::span<const double> id_scores, std::span<const double> ood_scores);

/// Fraction of OOD scores >= lambda, where lambda is the ceil(0.05 * n_id)-th
/// smallest ID score. Requires n_id >= 20.
double fpr_at_95_tpr(std::span<const double> id_scores, std::span<const double> ood_scores);

// Largest order-statistic lambda such that at least target_tpr of id_scores are >= lambda.
double calibrate_lambda(std::span<const double> id_scores, double target_tpr = 0.95);

}  // namespace tdaood
