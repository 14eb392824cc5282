#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace tdaood {

// Non-owning view of one row-stochastic n x n attention map (row-major f32).
class AttentionMap {
public:
    AttentionMap(std::size_t n, std::span<const float> weights);

    std::size_t size() const { return n_; }
    float operator()(std::size_t i, std::size_t j) const { return weights_[i * n_ + j]; }

private:
    std::size_t n_;
    std::span<const float> weights_;
};

// Dense symmetric distance matrix with a zero diagonal.
class DistanceMatrix {
public:
    DistanceMatrix() = default;
    // Validates symmetry, zero diagonal, finiteness and non-negativity.
    DistanceMatrix(std::size_t n, std::vector<double> values);

    std::size_t size() const { return n_; }
    double operator()(std::size_t i, std::size_t j) const { return values_[i * n_ + j]; }
    const std::vector<double>& values() const { return values_; }
    double max_entry() const;

    friend bool operator==(const DistanceMatrix&, const DistanceMatrix&) = default;

private:
    std::size_t n_ = 0;
    std::vector<double> values_;
};

// d[i][j] = 1 - max(w[i][j], w[j][i]) off the diagonal, 0 on it. Widened to f64.
DistanceMatrix to_distance_matrix(const AttentionMap& map);

}  // namespace tdaood
