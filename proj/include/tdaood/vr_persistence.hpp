#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "tdaood/attention_graph.hpp"

namespace tdaood {

inline constexpr std::uint64_t kDefaultSimplexBudget = 50'000'000;
inline constexpr int kMaxHomologyDim = 3;

// Raised when a filtration would exceed the configured simplex budget.
class CapacityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct FilteredSimplex {
    std::vector<std::uint32_t> vertices;  // strictly increasing
    double value = 0.0;                   // max pairwise distance, 0 for vertices

    int dim() const { return static_cast<int>(vertices.size()) - 1; }
    friend bool operator==(const FilteredSimplex&, const FilteredSimplex&) = default;
};

struct PersistencePair {
    double birth = 0.0;
    double death = 0.0;
    int dim = 0;

    double lifetime() const { return death - birth; }
    friend bool operator==(const PersistencePair&, const PersistencePair&) = default;
};

// All (birth, death, dim) points of one distance matrix for dims 0..max_dim.
// Zero-persistence pairs are never stored; essential classes die at `cap`.
struct PersistenceDiagram {
    std::vector<PersistencePair> points;  // sorted by (dim, birth, death)
    double cap = 1.0;
    int max_dim = 0;

    std::vector<PersistencePair> in_dim(int dim) const;
    std::size_t count(int dim) const;
    friend bool operator==(const PersistenceDiagram&, const PersistenceDiagram&) = default;
};

struct PersistenceOptions {
    int max_hom_dim = kMaxHomologyDim;
    double cap = 1.0;
    std::uint64_t simplex_budget = kDefaultSimplexBudget;
};

/// Every simplex of dimension <= max_dim whose value is <= cap, ordered by
/// (value, dim, lexicographic vertex tuple). Throws CapacityError once more
/// than `budget` simplices have been produced.
std::vector<FilteredSimplex> vr_filtration(const DistanceMatrix& distances, int max_dim,
                                           double cap,
                                           std::uint64_t budget = kDefaultSimplexBudget);

/// Vietoris-Rips persistence over Z/2 for homology dimensions 0..max_hom_dim.
///
/// Dimension 0 is resolved with a union-find sweep over the edges; higher
/// dimensions run a persistent-cohomology reduction over simplices that are
/// enumerated implicitly through the combinatorial number system, with
/// clearing of columns already paired one dimension below. Equal filtration
/// values are broken by (dim, lexicographic vertex tuple), so results are
/// reproducible byte for byte.
///
/// Throws CapacityError when sum_{k<=max_hom_dim+1} C(n, k+1) exceeds the
/// simplex budget, and std::invalid_argument for max_hom_dim outside 0..3 or
/// a non-positive cap.
PersistenceDiagram compute_persistence(const DistanceMatrix& distances,
                                       const PersistenceOptions& options = {});

// Number of points of the given dim with birth <= eps < death.
std::size_t betti_at(const PersistenceDiagram& diagram, int dim, double eps);

// Upper bound on the simplex count compute_persistence has to consider.
std::uint64_t vr_simplex_bound(std::size_t n_points, int max_hom_dim);

// Debug dump: one CSV row per point (sample_id,layer,head,dim,birth,death).
void write_diagram_csv_header(std::ostream& out);
void write_diagram_csv(std::ostream& out, const std::string& sample_id, std::size_t layer,
                       std::size_t head, const PersistenceDiagram& diagram);

}  // namespace tdaood
