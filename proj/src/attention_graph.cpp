#include "tdaood/attention_graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "tdaood/record_io.hpp"

namespace tdaood {

AttentionMap::AttentionMap(std::size_t n, std::span<const float> weights)
    : n_(n), weights_(weights) {
    if (n < 2) {
        throw std::invalid_argument("attention map needs at least 2 tokens");
    }
    if (weights.size() != n * n) {
        throw std::invalid_argument("attention map payload is not n*n");
    }
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const float w = weights[i * n + j];
            if (!(w >= 0.0f && w <= 1.0f)) {
                throw std::invalid_argument("attention weight outside [0,1] in row " +
                                            std::to_string(i));
            }
            sum += w;
        }
        if (std::abs(sum - 1.0) > kRowSumTolerance) {
            throw std::invalid_argument("attention row " + std::to_string(i) + " sums to " +
                                        std::to_string(sum));
        }
    }
}

DistanceMatrix::DistanceMatrix(std::size_t n, std::vector<double> values)
    : n_(n), values_(std::move(values)) {
    if (values_.size() != n * n) {
        throw std::invalid_argument("distance matrix payload is not n*n");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (values_[i * n + i] != 0.0) {
            throw std::invalid_argument("distance matrix diagonal must be zero");
        }
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = values_[i * n + j];
            if (!std::isfinite(d) || d < 0.0) {
                throw std::invalid_argument("distance matrix entries must be finite and >= 0");
            }
            if (d != values_[j * n + i]) {
                throw std::invalid_argument("distance matrix must be symmetric");
            }
        }
    }
}

double DistanceMatrix::max_entry() const {
    return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end());
}

DistanceMatrix to_distance_matrix(const AttentionMap& map) {
    const std::size_t n = map.size();
    std::vector<double> d(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double strongest =
                std::max(static_cast<double>(map(i, j)), static_cast<double>(map(j, i)));
            d[i * n + j] = d[j * n + i] = 1.0 - strongest;
        }
    }
    return DistanceMatrix(n, std::move(d));
}

}  // namespace tdaood
