#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gsrcpd/error.hpp"
#include "gsrcpd/observation.hpp"

namespace gsrcpd {

enum class GraphKind { Complete, MinimumSpanningTree, NearestNeighbor };

inline std::string_view to_string(GraphKind kind) {
    switch (kind) {
        case GraphKind::Complete: return "cg";
        case GraphKind::MinimumSpanningTree: return "mst";
        case GraphKind::NearestNeighbor: return "nng";
    }
    return "?";
}

inline GraphKind parse_graph_kind(std::string_view name) {
    if (name == "cg" || name == "CG" || name == "complete") return GraphKind::Complete;
    if (name == "mst" || name == "MST") return GraphKind::MinimumSpanningTree;
    if (name == "nng" || name == "NNG") return GraphKind::NearestNeighbor;
    throw DomainError("unknown graph kind '" + std::string(name) + "' (expected cg, mst or nng)");
}

/// Undirected weighted edge, i < j, w = squared Euclidean distance.
struct Edge {
    std::size_t i = 0;
    std::size_t j = 0;
    double w = 0.0;

    friend bool operator==(const Edge&, const Edge&) = default;
};

/// A graph over a block of observations and its squared spanning weight.
struct GraphSpanning {
    GraphKind kind = GraphKind::Complete;
    std::vector<Edge> edges;
    double weight = 0.0;
};

/// Spanning weights of the left block, right block and whole window for a
/// split at reference point k.
struct SpanningTriplet {
    double left = 0.0;
    double right = 0.0;
    double full = 0.0;
};

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw DimensionMismatch("squared_distance: dimensions " + std::to_string(a.size()) + " and " +
                                std::to_string(b.size()));
    }
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double diff = a[j] - b[j];
        s += diff * diff;
    }
    return s;
}

/// Union-find with path halving and union by size.
class DisjointSet {
  public:
    explicit DisjointSet(std::size_t n) : parent_(n), size_(n, 1) { std::iota(parent_.begin(), parent_.end(), 0); }

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
        if (a == b) return false;
        if (size_[a] < size_[b]) std::swap(a, b);
        parent_[b] = a;
        size_[a] += size_[b];
        return true;
    }

  private:
    std::vector<std::size_t> parent_;
    std::vector<std::size_t> size_;
};

/// Dense symmetric matrix of pairwise squared distances.
class DistanceMatrix {
  public:
    DistanceMatrix() = default;

    explicit DistanceMatrix(const ObservationWindow& window) : m_(window.size()), d_(m_ * m_, 0.0) {
        for (std::size_t i = 0; i < m_; ++i) {
            const auto yi = window.row(i);
            for (std::size_t j = i + 1; j < m_; ++j) {
                const double w = squared_distance(yi, window.row(j));
                if (!std::isfinite(w)) {
                    throw DomainError("non-finite squared distance between observations " + std::to_string(i) +
                                      " and " + std::to_string(j));
                }
                d_[i * m_ + j] = w;
                d_[j * m_ + i] = w;
            }
        }
    }

    [[nodiscard]] std::size_t size() const { return m_; }
    [[nodiscard]] double operator()(std::size_t i, std::size_t j) const { return d_[i * m_ + j]; }

  private:
    std::size_t m_ = 0;
    std::vector<double> d_;
};

namespace detail {

inline bool edge_less(const Edge& a, const Edge& b) {
    if (a.w != b.w) return a.w < b.w;
    if (a.i != b.i) return a.i < b.i;
    return a.j < b.j;
}

/// All pairs i < j of [0, m), ordered by (w, i, j).
inline std::vector<Edge> sorted_edges(const DistanceMatrix& dist) {
    const std::size_t m = dist.size();
    std::vector<Edge> edges;
    edges.reserve(m * (m - 1) / 2);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) edges.push_back({i, j, dist(i, j)});
    std::sort(edges.begin(), edges.end(), edge_less);
    return edges;
}

/// Kruskal restricted to nodes [begin, end), scanning a (w, i, j)-sorted
/// edge list of the enclosing window. Node indices in the result are
/// relative to `begin`.
inline GraphSpanning kruskal_block(std::span<const Edge> sorted, std::size_t begin, std::size_t end) {
    GraphSpanning g{GraphKind::MinimumSpanningTree, {}, 0.0};
    const std::size_t m = end - begin;
    if (m < 2) return g;
    g.edges.reserve(m - 1);
    DisjointSet ds(m);
    for (const Edge& e : sorted) {
        if (e.i < begin || e.j >= end) continue;
        if (ds.unite(e.i - begin, e.j - begin)) {
            g.edges.push_back({e.i - begin, e.j - begin, e.w});
            g.weight += e.w;
            if (g.edges.size() == m - 1) break;
        }
    }
    return g;
}

/// Symmetrized 1-nearest-neighbor graph on [begin, end); ties go to the
/// lowest index.
inline GraphSpanning nearest_neighbor_block(const DistanceMatrix& dist, std::size_t begin, std::size_t end) {
    GraphSpanning g{GraphKind::NearestNeighbor, {}, 0.0};
    const std::size_t m = end - begin;
    if (m < 2) return g;
    g.edges.reserve(m);
    for (std::size_t i = begin; i < end; ++i) {
        std::size_t best = end;
        double best_w = 0.0;
        for (std::size_t j = begin; j < end; ++j) {
            if (j == i) continue;
            const double w = dist(i, j);
            if (best == end || w < best_w) {
                best = j;
                best_w = w;
            }
        }
        const std::size_t a = std::min(i, best) - begin;
        const std::size_t b = std::max(i, best) - begin;
        g.edges.push_back({a, b, best_w});
    }
    std::sort(g.edges.begin(), g.edges.end(),
              [](const Edge& x, const Edge& y) { return x.i != y.i ? x.i < y.i : x.j < y.j; });
    g.edges.erase(std::unique(g.edges.begin(), g.edges.end(),
                              [](const Edge& x, const Edge& y) { return x.i == y.i && x.j == y.j; }),
                  g.edges.end());
    for (const Edge& e : g.edges) g.weight += e.w;
    return g;
}

inline GraphSpanning complete_block(const DistanceMatrix& dist, std::size_t begin, std::size_t end) {
    GraphSpanning g{GraphKind::Complete, {}, 0.0};
    const std::size_t m = end - begin;
    if (m < 2) return g;
    g.edges.reserve(m * (m - 1) / 2);
    for (std::size_t i = begin; i < end; ++i)
        for (std::size_t j = i + 1; j < end; ++j) {
            g.edges.push_back({i - begin, j - begin, dist(i, j)});
            g.weight += dist(i, j);
        }
    return g;
}

inline void require_split(std::size_t window_size, std::size_t k) {
    if (window_size < 4 || window_size % 2 != 0) {
        throw DomainError("window length must be even and >= 4, got " + std::to_string(window_size));
    }
    if (k < 2 || k + 2 > window_size) {
        throw DomainError("reference point k=" + std::to_string(k) + " outside [2, " +
                          std::to_string(window_size - 2) + "]");
    }
}

}  // namespace detail

/// Builds the requested graph over all observations of `window`.
///
/// MST: Kruskal over the complete distance graph with ties broken by the
/// (w, i, j) ordering. NNG: each node linked to its nearest neighbour
/// (lowest index on ties), symmetric duplicates removed.
inline GraphSpanning build_graph(const ObservationWindow& window, GraphKind kind) {
    if (window.size() < 2) throw DomainError("build_graph needs at least 2 observations");
    const DistanceMatrix dist(window);
    switch (kind) {
        case GraphKind::Complete: return detail::complete_block(dist, 0, dist.size());
        case GraphKind::MinimumSpanningTree: {
            const auto edges = detail::sorted_edges(dist);
            return detail::kruskal_block(edges, 0, dist.size());
        }
        case GraphKind::NearestNeighbor: return detail::nearest_neighbor_block(dist, 0, dist.size());
    }
    throw DomainError("unknown graph kind");
}

/// Precomputed spanning weights of contiguous blocks of one window.
///
/// Complete graphs use prefix sums of mean-centred coordinates
/// (sum_{i<j} |y_i - y_j|^2 = m * sum |c_i|^2 - |sum c_i|^2), so a block
/// costs O(d) after an O(m d) setup; blocks of identical rows return an exact
/// zero. MST and NNG blocks are built from a shared distance matrix.
class SpanningEngine {
  public:
    SpanningEngine(const ObservationWindow& window, GraphKind kind) : kind_(kind), m_(window.size()) {
        if (m_ < 2) throw DomainError("spanning engine needs at least 2 observations");
        if (kind == GraphKind::Complete) {
            init_moments(window);
        } else {
            dist_ = DistanceMatrix(window);
            if (kind == GraphKind::MinimumSpanningTree) sorted_ = detail::sorted_edges(dist_);
        }
    }

    [[nodiscard]] GraphKind kind() const { return kind_; }
    [[nodiscard]] std::size_t size() const { return m_; }

    /// Spanning weight of the graph built on rows [begin, end).
    [[nodiscard]] double block_weight(std::size_t begin, std::size_t end) const {
        if (end - begin < 2) return 0.0;
        switch (kind_) {
            case GraphKind::Complete: return complete_weight(begin, end);
            case GraphKind::MinimumSpanningTree: return detail::kruskal_block(sorted_, begin, end).weight;
            case GraphKind::NearestNeighbor: return detail::nearest_neighbor_block(dist_, begin, end).weight;
        }
        return 0.0;
    }

    [[nodiscard]] double full_weight() const { return block_weight(0, m_); }

    [[nodiscard]] SpanningTriplet triplet(std::size_t k) const {
        detail::require_split(m_, k);
        return {block_weight(0, k), block_weight(k, m_), full_weight()};
    }

    /// Triplet reusing a previously computed full-window weight.
    [[nodiscard]] SpanningTriplet triplet(std::size_t k, double full) const {
        detail::require_split(m_, k);
        return {block_weight(0, k), block_weight(k, m_), full};
    }

  private:
    void init_moments(const ObservationWindow& window) {
        const std::size_t d = window.dim();
        d_ = d;
        std::vector<double> mean(d, 0.0);
        for (std::size_t i = 0; i < m_; ++i) {
            const auto y = window.row(i);
            for (std::size_t j = 0; j < d; ++j) mean[j] += y[j];
        }
        for (auto& v : mean) v /= static_cast<double>(m_);
        prefix_sum_.assign((m_ + 1) * d, 0.0);
        prefix_sq_.assign(m_ + 1, 0.0);
        prefix_same_.assign(m_ + 1, 0);
        for (std::size_t i = 0; i < m_; ++i) {
            const auto y = window.row(i);
            double sq = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                const double c = y[j] - mean[j];
                prefix_sum_[(i + 1) * d + j] = prefix_sum_[i * d + j] + c;
                sq += c * c;
            }
            if (!std::isfinite(sq)) throw DomainError("non-finite squared distance in window");
            prefix_sq_[i + 1] = prefix_sq_[i] + sq;
            const bool same = i > 0 && std::ranges::equal(y, window.row(i - 1));
            prefix_same_[i + 1] = prefix_same_[i] + (same ? 1 : 0);
        }
        rows_ = window;
    }

    [[nodiscard]] double complete_weight(std::size_t begin, std::size_t end) const {
        const std::size_t m = end - begin;
        // Rows begin+1..end-1 all equal to their predecessor: constant block.
        if (prefix_same_[end] - prefix_same_[begin + 1] == m - 1) return 0.0;
        double cross = 0.0;
        for (std::size_t j = 0; j < d_; ++j) {
            const double s = prefix_sum_[end * d_ + j] - prefix_sum_[begin * d_ + j];
            cross += s * s;
        }
        const double w = static_cast<double>(m) * (prefix_sq_[end] - prefix_sq_[begin]) - cross;
        if (w > 0.0) return w;
        // Cancellation ate a non-constant block; sum the pairs directly.
        double direct = 0.0;
        for (std::size_t i = begin; i < end; ++i)
            for (std::size_t j = i + 1; j < end; ++j) direct += squared_distance(rows_.row(i), rows_.row(j));
        return direct;
    }

    GraphKind kind_;
    std::size_t m_;
    std::size_t d_ = 0;
    DistanceMatrix dist_;
    std::vector<Edge> sorted_;
    std::vector<double> prefix_sum_;
    std::vector<double> prefix_sq_;
    std::vector<std::size_t> prefix_same_;
    ObservationWindow rows_;
};

inline double spanning_weight(const ObservationWindow& window, GraphKind kind) {
    if (window.size() < 2) throw DomainError("spanning weight needs at least 2 observations");
    return SpanningEngine(window, kind).full_weight();
}

/// Left, right and full-window spanning weights for a split at k (the first
/// k observations form the left block).
inline SpanningTriplet spanning_triplet(const ObservationWindow& window, std::size_t k, GraphKind kind) {
    detail::require_split(window.size(), k);
    return SpanningEngine(window, kind).triplet(k);
}

/// Sum of squared distances over all pairs straddling the split at k.
inline double gap_spanning(const ObservationWindow& window, std::size_t k) {
    detail::require_split(window.size(), k);
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = k; j < window.size(); ++j) s += squared_distance(window.row(i), window.row(j));
    return s;
}

}  // namespace gsrcpd
