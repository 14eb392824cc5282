#include "tdaood/vr_persistence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <queue>
#include <unordered_map>
#include <unordered_set>

namespace tdaood {

namespace {

using Index = std::uint64_t;

struct Entry {
    double value;
    Index index;  // colex rank of the simplex within its dimension
};

// Internally vertices are relabeled u = n - 1 - v. Under that relabeling a
// larger colex rank is a lexicographically smaller vertex tuple in the
// caller's labels, so "earlier" below is (value, lexicographic tuple).
bool earlier(const Entry& a, const Entry& b) {
    return a.value < b.value || (a.value == b.value && a.index > b.index);
}

struct LaterFirst {
    bool operator()(const Entry& a, const Entry& b) const { return earlier(b, a); }
};

class BinomialTable {
public:
    BinomialTable(std::size_t n, std::size_t max_k) : max_k_(max_k), table_((n + 1) * (max_k + 1), 0) {
        for (std::size_t m = 0; m <= n; ++m) {
            at(m, 0) = 1;
            for (std::size_t k = 1; k <= std::min(m, max_k); ++k) {
                at(m, k) = at(m - 1, k - 1) + (k <= m - 1 ? at(m - 1, k) : 0);
            }
        }
    }

    Index operator()(std::size_t m, std::size_t k) const {
        return k > max_k_ ? 0 : table_[m * (max_k_ + 1) + k];
    }

private:
    Index& at(std::size_t m, std::size_t k) { return table_[m * (max_k_ + 1) + k]; }

    std::size_t max_k_;
    std::vector<Index> table_;
};

class RipsComplex {
public:
    RipsComplex(const DistanceMatrix& distances, int max_simplex_dim, double cap)
        : n_(distances.size()),
          cap_(cap),
          dist_(n_ * n_),
          binomial_(n_, static_cast<std::size_t>(max_simplex_dim) + 2) {
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t j = 0; j < n_; ++j) {
                dist_[i * n_ + j] = distances(n_ - 1 - i, n_ - 1 - j);
            }
        }
    }

    std::size_t size() const { return n_; }
    double distance(std::uint32_t a, std::uint32_t b) const { return dist_[a * n_ + b]; }
    Index binomial(std::size_t m, std::size_t k) const { return binomial_(m, k); }
    Index simplex_count(int dim) const { return binomial_(n_, static_cast<std::size_t>(dim) + 1); }

    // Vertices of the dim-simplex with rank `index`, in decreasing order.
    void decode(Index index, int dim, std::vector<std::uint32_t>& out) const {
        out.clear();
        std::size_t top = n_;
        for (std::size_t k = static_cast<std::size_t>(dim) + 1; k > 0; --k) {
            // Largest v < top with C(v, k) <= index.
            std::size_t lo = k - 1, hi = top - 1;
            while (lo < hi) {
                const std::size_t mid = lo + (hi - lo + 1) / 2;
                if (binomial_(mid, k) <= index) {
                    lo = mid;
                } else {
                    hi = mid - 1;
                }
            }
            out.push_back(static_cast<std::uint32_t>(lo));
            index -= binomial_(lo, k);
            top = lo;
        }
    }

    double diameter(const std::vector<std::uint32_t>& vertices) const {
        double diam = 0.0;
        for (std::size_t a = 0; a < vertices.size(); ++a) {
            for (std::size_t b = a + 1; b < vertices.size(); ++b) {
                diam = std::max(diam, distance(vertices[a], vertices[b]));
            }
        }
        return diam;
    }

    // Appends every coface of `simplex` with value <= cap, in decreasing rank.
    void coboundary(const Entry& simplex, int dim, std::vector<std::uint32_t>& scratch,
                    std::vector<Entry>& out) const {
        decode(simplex.index, dim, scratch);
        Index index_below = simplex.index;
        Index index_above = 0;
        std::size_t k = static_cast<std::size_t>(dim) + 1;  // vertices of sigma below v
        std::size_t next = 0;                               // next vertex of sigma to pass
        for (std::size_t v = n_; v-- > 0;) {
            if (next < scratch.size() && scratch[next] == v) {
                index_below -= binomial_(v, k);
                index_above += binomial_(v, k + 1);
                --k;
                ++next;
                continue;
            }
            double value = simplex.value;
            for (std::uint32_t w : scratch) {
                value = std::max(value, distance(static_cast<std::uint32_t>(v), w));
            }
            if (value <= cap_) {
                out.push_back({value, index_above + binomial_(v, k + 1) + index_below});
            }
        }
    }

private:
    std::size_t n_;
    double cap_;
    std::vector<double> dist_;
    BinomialTable binomial_;
};

class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n), rank_(n, 0) {
        std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    }

    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    bool unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) {
            return false;
        }
        if (rank_[a] < rank_[b]) {
            std::swap(a, b);
        }
        parent_[b] = a;
        if (rank_[a] == rank_[b]) {
            ++rank_[a];
        }
        return true;
    }

private:
    std::vector<std::size_t> parent_;
    std::vector<std::uint8_t> rank_;
};

// Pops the earliest entry with odd multiplicity, or returns false if none.
bool pop_pivot(std::priority_queue<Entry, std::vector<Entry>, LaterFirst>& heap, Entry& pivot) {
    while (!heap.empty()) {
        pivot = heap.top();
        heap.pop();
        if (heap.empty() || heap.top().index != pivot.index) {
            return true;
        }
        heap.pop();
    }
    return false;
}

// Cancels repeated entries mod 2 and returns the survivors sorted by rank.
std::vector<Entry> canonical_chain(std::vector<Entry> chain) {
    std::sort(chain.begin(), chain.end(),
              [](const Entry& a, const Entry& b) { return a.index < b.index; });
    std::vector<Entry> out;
    out.reserve(chain.size());
    for (std::size_t i = 0; i < chain.size();) {
        std::size_t j = i;
        while (j < chain.size() && chain[j].index == chain[i].index) {
            ++j;
        }
        if ((j - i) % 2 == 1) {
            out.push_back(chain[i]);
        }
        i = j;
    }
    return out;
}

class PersistenceEngine {
public:
    PersistenceEngine(const DistanceMatrix& distances, const PersistenceOptions& options)
        : options_(options), complex_(distances, options.max_hom_dim + 1, options.cap) {}

    PersistenceDiagram run() {
        PersistenceDiagram diagram;
        diagram.cap = options_.cap;
        diagram.max_dim = options_.max_hom_dim;

        std::vector<Entry> edge_columns = zero_dimensional(diagram.points);
        for (int dim = 1; dim <= options_.max_hom_dim; ++dim) {
            std::vector<Entry> columns =
                dim == 1 ? std::move(edge_columns) : assemble_columns(dim);
            reduce(columns, dim, diagram.points);
        }

        std::sort(diagram.points.begin(), diagram.points.end(),
                  [](const PersistencePair& a, const PersistencePair& b) {
                      if (a.dim != b.dim) return a.dim < b.dim;
                      if (a.birth != b.birth) return a.birth < b.birth;
                      return a.death < b.death;
                  });
        return diagram;
    }

private:
    void emit(std::vector<PersistencePair>& points, double birth, double death, int dim) const {
        if (death > birth) {
            points.push_back({birth, death, dim});
        }
    }

    // Union-find over edges in filtration order. Returns the unpaired edges
    // (dimension-1 columns) in reverse filtration order.
    std::vector<Entry> zero_dimensional(std::vector<PersistencePair>& points) {
        const std::size_t n = complex_.size();
        std::vector<Entry> edges;
        edges.reserve(n * (n - 1) / 2);
        for (std::uint32_t j = 1; j < n; ++j) {
            for (std::uint32_t i = 0; i < j; ++i) {
                const double value = complex_.distance(i, j);
                if (value <= options_.cap) {
                    edges.push_back({value, complex_.binomial(j, 2) + i});
                }
            }
        }
        std::sort(edges.begin(), edges.end(), earlier);

        UnionFind components(n);
        std::vector<Entry> unpaired;
        std::vector<std::uint32_t> scratch;
        std::size_t merges = 0;
        for (const Entry& edge : edges) {
            complex_.decode(edge.index, 1, scratch);
            if (components.unite(scratch[0], scratch[1])) {
                emit(points, 0.0, edge.value, 0);
                ++merges;
            } else {
                unpaired.push_back(edge);
            }
        }
        for (std::size_t c = 0; c < n - merges; ++c) {
            emit(points, 0.0, options_.cap, 0);
        }
        std::reverse(unpaired.begin(), unpaired.end());
        return unpaired;
    }

    // All dim-simplices within the cap that were not paired one dimension
    // below, in reverse filtration order.
    std::vector<Entry> assemble_columns(int dim) {
        std::vector<Entry> columns;
        std::vector<std::uint32_t> scratch;
        const Index count = complex_.simplex_count(dim);
        for (Index index = 0; index < count; ++index) {
            if (cleared_.count(index) != 0) {
                continue;
            }
            complex_.decode(index, dim, scratch);
            const double value = complex_.diameter(scratch);
            if (value <= options_.cap) {
                columns.push_back({value, index});
            }
        }
        std::sort(columns.begin(), columns.end(),
                  [](const Entry& a, const Entry& b) { return earlier(b, a); });
        return columns;
    }

    void reduce(const std::vector<Entry>& columns, int dim, std::vector<PersistencePair>& points) {
        const bool keep_pivots = dim < options_.max_hom_dim;
        std::unordered_map<Index, std::size_t> pivot_column;
        std::vector<std::vector<Entry>> reductions;
        pivot_column.reserve(columns.size());

        std::vector<std::uint32_t> scratch;
        std::vector<Entry> cofaces;
        std::vector<Entry> working_reduction;
        std::priority_queue<Entry, std::vector<Entry>, LaterFirst> working_coboundary;

        for (const Entry& column : columns) {
            cofaces.clear();
            complex_.coboundary(column, dim, scratch, cofaces);
            if (cofaces.empty()) {
                emit(points, column.value, options_.cap, dim);
                continue;
            }
            Entry pivot = *std::min_element(cofaces.begin(), cofaces.end(), earlier);

            // Fast path: the leading coface is not yet claimed by another column.
            auto claimed = pivot_column.find(pivot.index);
            if (claimed == pivot_column.end()) {
                pivot_column.emplace(pivot.index, reductions.size());
                reductions.push_back({column});
                emit(points, column.value, pivot.value, dim);
                continue;
            }

            working_coboundary = {};
            for (const Entry& e : cofaces) {
                working_coboundary.push(e);
            }
            working_reduction.assign(1, column);
            bool has_pivot = true;
            while (true) {
                has_pivot = pop_pivot(working_coboundary, pivot);
                if (!has_pivot) {
                    break;
                }
                claimed = pivot_column.find(pivot.index);
                if (claimed == pivot_column.end()) {
                    break;
                }
                working_coboundary.push(pivot);
                for (const Entry& simplex : reductions[claimed->second]) {
                    working_reduction.push_back(simplex);
                    cofaces.clear();
                    complex_.coboundary(simplex, dim, scratch, cofaces);
                    for (const Entry& e : cofaces) {
                        working_coboundary.push(e);
                    }
                }
            }

            if (!has_pivot) {
                emit(points, column.value, options_.cap, dim);
                continue;
            }
            pivot_column.emplace(pivot.index, reductions.size());
            reductions.push_back(canonical_chain(working_reduction));
            emit(points, column.value, pivot.value, dim);
        }

        cleared_.clear();
        if (keep_pivots) {
            cleared_.reserve(pivot_column.size());
            for (const auto& [index, slot] : pivot_column) {
                cleared_.insert(index);
            }
        }
    }

    PersistenceOptions options_;
    RipsComplex complex_;
    std::unordered_set<Index> cleared_;
};

// C(n, k) in long double, good enough for a budget comparison.
long double binomial_estimate(std::size_t n, std::size_t k) {
    if (k > n) return 0.0L;
    long double r = 1.0L;
    for (std::size_t i = 0; i < k; ++i) {
        r = r * static_cast<long double>(n - i) / static_cast<long double>(i + 1);
    }
    return r;
}

void check_options(const DistanceMatrix& distances, int max_dim, double cap) {
    if (max_dim < 0) {
        throw std::invalid_argument("max_dim must be >= 0");
    }
    if (!(cap > 0.0) || !std::isfinite(cap)) {
        throw std::invalid_argument("cap must be a finite positive value");
    }
    if (distances.size() == 0) {
        throw std::invalid_argument("distance matrix is empty");
    }
}

}  // namespace

std::vector<PersistencePair> PersistenceDiagram::in_dim(int dim) const {
    std::vector<PersistencePair> out;
    for (const auto& p : points) {
        if (p.dim == dim) {
            out.push_back(p);
        }
    }
    return out;
}

std::size_t PersistenceDiagram::count(int dim) const {
    return static_cast<std::size_t>(std::count_if(
        points.begin(), points.end(), [dim](const PersistencePair& p) { return p.dim == dim; }));
}

std::uint64_t vr_simplex_bound(std::size_t n_points, int max_hom_dim) {
    long double total = 0.0L;
    for (int k = 0; k <= max_hom_dim + 1; ++k) {
        total += binomial_estimate(n_points, static_cast<std::size_t>(k) + 1);
    }
    if (total >= static_cast<long double>(std::numeric_limits<std::uint64_t>::max())) {
        return std::numeric_limits<std::uint64_t>::max();
    }
    return static_cast<std::uint64_t>(total);
}

std::vector<FilteredSimplex> vr_filtration(const DistanceMatrix& distances, int max_dim, double cap,
                                           std::uint64_t budget) {
    check_options(distances, max_dim, cap);
    const auto n = static_cast<std::uint32_t>(distances.size());
    std::vector<FilteredSimplex> simplices;

    auto add = [&](FilteredSimplex s) {
        if (simplices.size() >= budget) {
            throw CapacityError("VR filtration exceeds the simplex budget of " +
                                std::to_string(budget));
        }
        simplices.push_back(std::move(s));
    };

    // Depth-first clique extension by increasing vertex; values only grow.
    std::vector<std::uint32_t> stack;
    auto extend = [&](auto&& self, double value) -> void {
        add({stack, value});
        if (static_cast<int>(stack.size()) - 1 >= max_dim) {
            return;
        }
        for (std::uint32_t v = stack.back() + 1; v < n; ++v) {
            double next = value;
            for (std::uint32_t u : stack) {
                next = std::max(next, distances(u, v));
            }
            if (next <= cap) {
                stack.push_back(v);
                self(self, next);
                stack.pop_back();
            }
        }
    };
    for (std::uint32_t v = 0; v < n; ++v) {
        stack.assign(1, v);
        extend(extend, 0.0);
    }

    std::sort(simplices.begin(), simplices.end(),
              [](const FilteredSimplex& a, const FilteredSimplex& b) {
                  if (a.value != b.value) return a.value < b.value;
                  if (a.vertices.size() != b.vertices.size()) {
                      return a.vertices.size() < b.vertices.size();
                  }
                  return a.vertices < b.vertices;
              });
    return simplices;
}

PersistenceDiagram compute_persistence(const DistanceMatrix& distances,
                                       const PersistenceOptions& options) {
    check_options(distances, options.max_hom_dim, options.cap);
    if (options.max_hom_dim > kMaxHomologyDim) {
        throw std::invalid_argument("max_hom_dim must lie in 0..3");
    }
    const std::uint64_t bound = vr_simplex_bound(distances.size(), options.max_hom_dim);
    if (bound > options.simplex_budget) {
        throw CapacityError("VR complex on " + std::to_string(distances.size()) +
                            " points up to dimension " + std::to_string(options.max_hom_dim + 1) +
                            " has up to " + std::to_string(bound) +
                            " simplices, over the budget of " +
                            std::to_string(options.simplex_budget) +
                            "; lower max_hom_dim or truncate tokens");
    }
    return PersistenceEngine(distances, options).run();
}

std::size_t betti_at(const PersistenceDiagram& diagram, int dim, double eps) {
    return static_cast<std::size_t>(
        std::count_if(diagram.points.begin(), diagram.points.end(), [&](const PersistencePair& p) {
            return p.dim == dim && p.birth <= eps && eps < p.death;
        }));
}

void write_diagram_csv_header(std::ostream& out) {
    out << "sample_id,layer,head,dim,birth,death\n";
}

void write_diagram_csv(std::ostream& out, const std::string& sample_id, std::size_t layer,
                       std::size_t head, const PersistenceDiagram& diagram) {
    const auto precision = out.precision(std::numeric_limits<double>::max_digits10);
    for (const auto& p : diagram.points) {
        out << sample_id << ',' << layer << ',' << head << ',' << p.dim << ',' << p.birth << ','
            << p.death << '\n';
    }
    out.precision(precision);
}

}  // namespace tdaood
