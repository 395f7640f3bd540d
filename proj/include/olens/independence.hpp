#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "olens/geometry.hpp"
#include "olens/rng.hpp"

namespace olens {

using IndexSet = std::vector<std::size_t>;  // kept sorted ascending

// Labeled finite set of vectors sharing one dimension. Columns of coords()
// are the vectors, in label order.
class EmbeddingTable {
public:
    EmbeddingTable(std::vector<std::string> labels, Mat coords)
        : labels_(std::move(labels)), coords_(std::move(coords)) {
        if (labels_.empty()) throw invalid_input_error("EmbeddingTable: table is empty");
        if (static_cast<Eigen::Index>(labels_.size()) != coords_.cols())
            throw invalid_input_error("EmbeddingTable: label count does not match vector count");
        if (coords_.rows() < 1) throw invalid_input_error("EmbeddingTable: dimension must be >= 1");
        if (!coords_.allFinite())
            throw invalid_input_error("EmbeddingTable: coordinates must be finite");
        std::set<std::string> seen;
        for (const auto& l : labels_)
            if (!seen.insert(l).second)
                throw invalid_input_error("EmbeddingTable: duplicate label '" + l + "'");
    }

    std::size_t size() const { return labels_.size(); }
    Eigen::Index dim() const { return coords_.rows(); }
    const std::vector<std::string>& labels() const { return labels_; }
    const Mat& coords() const { return coords_; }

    Vec vector(std::size_t i) const {
        check_index(i);
        return coords_.col(static_cast<Eigen::Index>(i));
    }
    const std::string& label(std::size_t i) const {
        check_index(i);
        return labels_[i];
    }

    // Index of a label, or throws.
    std::size_t index_of(const std::string& label) const {
        for (std::size_t i = 0; i < labels_.size(); ++i)
            if (labels_[i] == label) return i;
        throw invalid_input_error("EmbeddingTable: unknown label '" + label + "'");
    }
    bool contains(const std::string& label) const {
        for (const auto& l : labels_)
            if (l == label) return true;
        return false;
    }

    // Copy with every vector scaled to unit norm; zero vectors are left
    // unchanged (they have no direction to keep).
    EmbeddingTable normalized(double zero_tol = 1e-12) const {
        Mat m = coords_;
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            const double n = m.col(j).norm();
            if (n > zero_tol) m.col(j) /= n;
        }
        return EmbeddingTable(labels_, std::move(m));
    }

    // Copy keeping only the given rows of the label list, in the given order.
    EmbeddingTable select(const std::vector<std::size_t>& keep) const {
        if (keep.empty()) throw invalid_input_error("EmbeddingTable::select: empty selection");
        std::vector<std::string> ls;
        Mat m(coords_.rows(), static_cast<Eigen::Index>(keep.size()));
        for (std::size_t t = 0; t < keep.size(); ++t) {
            check_index(keep[t]);
            ls.push_back(labels_[keep[t]]);
            m.col(static_cast<Eigen::Index>(t)) = coords_.col(static_cast<Eigen::Index>(keep[t]));
        }
        return EmbeddingTable(std::move(ls), std::move(m));
    }

    void check_index(std::size_t i) const {
        if (i >= labels_.size()) throw invalid_input_error("EmbeddingTable: index out of range");
    }

private:
    std::vector<std::string> labels_;
    Mat coords_;  // dim x n
};

// Simple undirected graph on vertices 0..n-1. No self-loops; edges are
// stored once as (min, max).
class UndirectedGraph {
public:
    explicit UndirectedGraph(std::size_t n = 0) : n_(n) {}

    std::size_t vertex_count() const { return n_; }
    const std::set<std::pair<std::size_t, std::size_t>>& edges() const { return edges_; }

    void add_edge(std::size_t a, std::size_t b) {
        if (a >= n_ || b >= n_) throw invalid_input_error("UndirectedGraph: vertex out of range");
        if (a == b) throw invalid_input_error("UndirectedGraph: self-loops are not allowed");
        edges_.insert(a < b ? std::make_pair(a, b) : std::make_pair(b, a));
    }

    bool has_edge(std::size_t a, std::size_t b) const {
        if (a == b) return false;
        return edges_.count(a < b ? std::make_pair(a, b) : std::make_pair(b, a)) > 0;
    }

    IndexSet neighbors(std::size_t v) const {
        if (v >= n_) throw invalid_input_error("UndirectedGraph: vertex out of range");
        IndexSet out;
        for (const auto& [a, b] : edges_) {
            if (a == v) out.push_back(b);
            if (b == v) out.push_back(a);
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    std::size_t max_degree() const {
        std::vector<std::size_t> deg(n_, 0);
        for (const auto& [a, b] : edges_) {
            ++deg[a];
            ++deg[b];
        }
        std::size_t m = 0;
        for (std::size_t d : deg) m = std::max(m, d);
        return m;
    }

    Mat adjacency() const {
        Mat a = Mat::Zero(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
        for (const auto& [i, j] : edges_) {
            a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 1.0;
            a(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = 1.0;
        }
        return a;
    }

private:
    std::size_t n_;
    std::set<std::pair<std::size_t, std::size_t>> edges_;
};

namespace detail {

inline bool sets_disjoint(const IndexSet& a, const IndexSet& b) {
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] == b[j]) return false;
        if (a[i] < b[j])
            ++i;
        else
            ++j;
    }
    return true;
}

inline IndexSet set_union(const IndexSet& a, const IndexSet& b) {
    IndexSet out;
    out.reserve(a.size() + b.size());
    std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

inline bool set_contains(const IndexSet& s, std::size_t v) {
    return std::binary_search(s.begin(), s.end(), v);
}

}  // namespace detail

// A statement "A independent of B given C" over disjoint index sets, with
// A and B nonempty.
struct IndependenceTriple {
    IndexSet A, B, C;

    IndependenceTriple(IndexSet a, IndexSet b, IndexSet c)
        : A(std::move(a)), B(std::move(b)), C(std::move(c)) {
        if (A.empty() || B.empty())
            throw invalid_input_error("IndependenceTriple: A and B must be nonempty");
        if (!detail::sets_disjoint(A, B) || !detail::sets_disjoint(A, C) ||
            !detail::sets_disjoint(B, C))
            throw invalid_input_error("IndependenceTriple: sets must be pairwise disjoint");
    }
};

// a and b are partially orthogonal given C when their residuals, after
// projecting onto span(C), have inner product within ortho_tol of zero.
// A zero residual counts as orthogonal to everything.
inline bool partially_orthogonal(const EmbeddingTable& table, std::size_t a, std::size_t b,
                                 const IndexSet& c, const Tolerance& tol = {}) {
    table.check_index(a);
    table.check_index(b);
    if (a == b) throw invalid_input_error("partially_orthogonal: a and b must differ");
    if (detail::set_contains(c, a) || detail::set_contains(c, b))
        throw invalid_input_error("partially_orthogonal: a and b must not lie in C");
    const Subspace s = orthonormal_basis_of_columns(table.coords(), c, tol);
    const Vec ra = residual(table.vector(a), s);
    const Vec rb = residual(table.vector(b), s);
    return std::abs(ra.dot(rb)) <= tol.ortho_tol;
}

// Elementwise set extension: holds iff every pair (a, b) in A x B is
// partially orthogonal given C. Vacuously true when A or B is empty.
inline bool set_partially_orthogonal(const EmbeddingTable& table, const IndexSet& a,
                                     const IndexSet& b, const IndexSet& c,
                                     const Tolerance& tol = {}) {
    if (!detail::sets_disjoint(a, b) || !detail::sets_disjoint(a, c) ||
        !detail::sets_disjoint(b, c))
        throw invalid_input_error("set_partially_orthogonal: sets must be pairwise disjoint");
    if (a.empty() || b.empty()) return true;
    const Subspace s = orthonormal_basis_of_columns(table.coords(), c, tol);
    std::vector<Vec> ra, rb;
    ra.reserve(a.size());
    rb.reserve(b.size());
    for (std::size_t i : a) {
        table.check_index(i);
        ra.push_back(residual(table.vector(i), s));
    }
    for (std::size_t j : b) {
        table.check_index(j);
        rb.push_back(residual(table.vector(j), s));
    }
    for (const Vec& x : ra)
        for (const Vec& y : rb)
            if (std::abs(x.dot(y)) > tol.ortho_tol) return false;
    return true;
}

// Separation in an undirected graph: no path from A to B avoids C.
// BFS over the graph with C removed. Vacuously true for empty A or B.
inline bool graph_separated(const UndirectedGraph& g, const IndexSet& a, const IndexSet& b,
                            const IndexSet& c) {
    if (!detail::sets_disjoint(a, b) || !detail::sets_disjoint(a, c) ||
        !detail::sets_disjoint(b, c))
        throw invalid_input_error("graph_separated: sets must be pairwise disjoint");
    const std::size_t n = g.vertex_count();
    for (std::size_t v : a)
        if (v >= n) throw invalid_input_error("graph_separated: vertex out of range");
    for (std::size_t v : b)
        if (v >= n) throw invalid_input_error("graph_separated: vertex out of range");
    for (std::size_t v : c)
        if (v >= n) throw invalid_input_error("graph_separated: vertex out of range");
    if (a.empty() || b.empty()) return true;

    std::vector<char> blocked(n, 0), visited(n, 0);
    for (std::size_t v : c) blocked[v] = 1;
    std::deque<std::size_t> queue;
    for (std::size_t v : a) {
        if (!blocked[v]) {
            visited[v] = 1;
            queue.push_back(v);
        }
    }
    while (!queue.empty()) {
        const std::size_t v = queue.front();
        queue.pop_front();
        if (detail::set_contains(b, v)) return false;
        for (std::size_t w : g.neighbors(v)) {
            if (!blocked[w] && !visited[w]) {
                visited[w] = 1;
                queue.push_back(w);
            }
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// Axiom suites
// ---------------------------------------------------------------------------

enum class Axiom { Symmetry = 1, Decomposition, WeakUnion, Contraction, Intersection, Composition };

inline const char* axiom_name(Axiom a) {
    switch (a) {
        case Axiom::Symmetry: return "A1-symmetry";
        case Axiom::Decomposition: return "A2-decomposition";
        case Axiom::WeakUnion: return "A3-weak-union";
        case Axiom::Contraction: return "A4-contraction";
        case Axiom::Intersection: return "A5-intersection";
        case Axiom::Composition: return "A6-composition";
    }
    return "unknown";
}

inline std::vector<Axiom> all_axioms() {
    return {Axiom::Symmetry,    Axiom::Decomposition, Axiom::WeakUnion,
            Axiom::Contraction, Axiom::Intersection,  Axiom::Composition};
}

struct AxiomViolation {
    std::size_t tuple_index;  // trial number (sampled) or enumeration rank (exhaustive)
    Axiom axiom;
    IndexSet A, B, C, D;
};

struct AxiomReport {
    std::size_t tuples_checked = 0;
    bool exhaustive = false;
    std::vector<AxiomViolation> violations;
    bool passed() const { return violations.empty(); }
    std::size_t count(Axiom a) const {
        std::size_t c = 0;
        for (const auto& v : violations)
            if (v.axiom == a) ++c;
        return c;
    }
};

enum class AxiomCheckMode { Auto, Sampled, Exhaustive };

namespace detail {

// Evaluates every requested axiom's implication on one disjoint tuple.
template <class Relation>
void check_tuple(Relation&& rel, const std::vector<Axiom>& axioms, const IndexSet& a,
                 const IndexSet& b, const IndexSet& c, const IndexSet& d,
                 std::size_t tuple_index, AxiomReport& report) {
    const IndexSet bd = set_union(b, d);
    const IndexSet cd = set_union(c, d);
    const IndexSet bc = set_union(b, c);
    for (Axiom ax : axioms) {
        bool violated = false;
        switch (ax) {
            case Axiom::Symmetry:
                violated = rel(a, b, c) && !rel(b, a, c);
                break;
            case Axiom::Decomposition:
                violated = rel(a, bd, c) && !(rel(a, b, c) && rel(a, d, c));
                break;
            case Axiom::WeakUnion:
                violated = rel(a, bd, c) && !rel(a, b, cd);
                break;
            case Axiom::Contraction:
                violated = rel(a, b, c) && rel(a, d, bc) && !rel(a, bd, c);
                break;
            case Axiom::Intersection:
                violated = rel(a, b, cd) && rel(a, c, bd) && !rel(a, bc, d);
                break;
            case Axiom::Composition:
                violated = rel(a, b, c) && rel(a, d, c) && !rel(a, bd, c);
                break;
        }
        if (violated) report.violations.push_back({tuple_index, ax, a, b, c, d});
    }
    ++report.tuples_checked;
}

}  // namespace detail

// Samples disjoint subset tuples (A, B, C, D) of [0, universe) with A and B
// nonempty, and reports every axiom implication that fails. Deterministic
// for a fixed seed. With mode Auto the full 5^n tuple space is enumerated
// instead whenever that is no more work than the requested trials;
// Exhaustive forces enumeration and refuses universe > 8.
template <class Relation>
AxiomReport check_axioms(Relation&& rel, std::size_t universe, const std::vector<Axiom>& axioms,
                         std::size_t trials, std::uint64_t seed,
                         AxiomCheckMode mode = AxiomCheckMode::Auto) {
    if (universe < 2) throw invalid_input_error("check_axioms: universe must have >= 2 elements");
    if (trials < 1) throw invalid_input_error("check_axioms: trials must be >= 1");

    bool exhaustive = false;
    double tuple_space = 1.0;
    for (std::size_t i = 0; i < universe; ++i) tuple_space *= 5.0;
    if (mode == AxiomCheckMode::Exhaustive) {
        if (universe > 8)
            throw guard_error("check_axioms: exhaustive mode refuses universe > 8 (5^n tuples)");
        exhaustive = true;
    } else if (mode == AxiomCheckMode::Auto) {
        exhaustive = tuple_space <= static_cast<double>(trials);
    }

    AxiomReport report;
    report.exhaustive = exhaustive;

    if (exhaustive) {
        // Base-5 counter: digit g of tuple t assigns element g to one of
        // {none, A, B, C, D}.
        const std::uint64_t total = static_cast<std::uint64_t>(tuple_space);
        for (std::uint64_t t = 0; t < total; ++t) {
            IndexSet a, b, c, d;
            std::uint64_t x = t;
            for (std::size_t g = 0; g < universe; ++g) {
                switch (x % 5) {
                    case 1: a.push_back(g); break;
                    case 2: b.push_back(g); break;
                    case 3: c.push_back(g); break;
                    case 4: d.push_back(g); break;
                    default: break;
                }
                x /= 5;
            }
            if (a.empty() || b.empty()) continue;
            detail::check_tuple(rel, axioms, a, b, c, d, static_cast<std::size_t>(t), report);
        }
        return report;
    }

    SplitMix64 rng(seed);
    for (std::size_t t = 0; t < trials; ++t) {
        IndexSet a, b, c, d;
        do {
            a.clear();
            b.clear();
            c.clear();
            d.clear();
            for (std::size_t g = 0; g < universe; ++g) {
                switch (rng.below(5)) {
                    case 1: a.push_back(g); break;
                    case 2: b.push_back(g); break;
                    case 3: c.push_back(g); break;
                    case 4: d.push_back(g); break;
                    default: break;
                }
            }
        } while (a.empty() || b.empty());
        detail::check_tuple(rel, axioms, a, b, c, d, t, report);
    }
    return report;
}

// Relation adapters for check_axioms.
inline auto partial_orthogonality_relation(const EmbeddingTable& table, const Tolerance& tol = {}) {
    return [&table, tol](const IndexSet& a, const IndexSet& b, const IndexSet& c) {
        return set_partially_orthogonal(table, a, b, c, tol);
    };
}

inline auto graph_separation_relation(const UndirectedGraph& g) {
    return [&g](const IndexSet& a, const IndexSet& b, const IndexSet& c) {
        return graph_separated(g, a, b, c);
    };
}

}  // namespace olens
