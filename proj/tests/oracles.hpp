#pragma once

// Independent reference implementations used only by the tests. They avoid
// the library's code paths on purpose: projection goes through a rank-
// revealing least-squares solve instead of an SVD basis, separation walks
// the adjacency matrix directly, and boundary enumeration re-applies the
// raw definition to every subset.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "olens/independence.hpp"

namespace oracles {

using olens::EmbeddingTable;
using olens::IndexSet;
using olens::Mat;
using olens::UndirectedGraph;
using olens::Vec;

inline Vec project(const Vec& v, const std::vector<Vec>& span) {
    if (span.empty()) return Vec::Zero(v.size());
    Mat a(v.size(), static_cast<Eigen::Index>(span.size()));
    for (std::size_t i = 0; i < span.size(); ++i) a.col(static_cast<Eigen::Index>(i)) = span[i];
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(a);
    return a * cod.solve(v);
}

inline Vec residual(const Vec& v, const std::vector<Vec>& span) { return v - project(v, span); }

inline std::vector<Vec> columns(const EmbeddingTable& t, const IndexSet& idx) {
    std::vector<Vec> out;
    for (std::size_t i : idx) out.push_back(t.vector(i));
    return out;
}

inline bool partially_orthogonal(const EmbeddingTable& t, std::size_t a, std::size_t b,
                                 const IndexSet& c, double ortho_tol = 1e-8) {
    const auto span = columns(t, c);
    return std::abs(residual(t.vector(a), span).dot(residual(t.vector(b), span))) <= ortho_tol;
}

// Reachability in the graph with the conditioning vertices deleted,
// walked over the adjacency matrix.
inline bool separated(const UndirectedGraph& g, const IndexSet& a, const IndexSet& b,
                      const IndexSet& c) {
    const std::size_t n = g.vertex_count();
    const Mat adj = g.adjacency();
    std::vector<char> blocked(n, 0), seen(n, 0);
    for (std::size_t v : c) blocked[v] = 1;
    std::vector<std::size_t> stack;
    for (std::size_t v : a)
        if (!blocked[v]) {
            seen[v] = 1;
            stack.push_back(v);
        }
    while (!stack.empty()) {
        const std::size_t cur = stack.back();
        stack.pop_back();
        for (std::size_t w = 0; w < n; ++w)
            if (adj(static_cast<Eigen::Index>(cur), static_cast<Eigen::Index>(w)) != 0.0 &&
                !blocked[w] && !seen[w]) {
                seen[w] = 1;
                stack.push_back(w);
            }
    }
    for (std::size_t v : b)
        if (seen[v]) return false;
    return true;
}

inline bool is_blanket(const EmbeddingTable& t, std::size_t v, const IndexSet& m,
                       double ortho_tol = 1e-8) {
    const auto span = columns(t, m);
    const Vec rv = residual(t.vector(v), span);
    for (std::size_t u = 0; u < t.size(); ++u) {
        if (u == v || std::find(m.begin(), m.end(), u) != m.end()) continue;
        if (std::abs(rv.dot(residual(t.vector(u), span))) > ortho_tol) return false;
    }
    return true;
}

// All inclusion-minimal blankets by brute force over every subset of the
// other indices, ordered by (cardinality, lexicographic members).
inline std::vector<IndexSet> minimal_blankets(const EmbeddingTable& t, std::size_t v,
                                              double ortho_tol = 1e-8) {
    IndexSet others;
    for (std::size_t u = 0; u < t.size(); ++u)
        if (u != v) others.push_back(u);
    const std::size_t m = others.size();

    std::vector<IndexSet> blankets;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
        IndexSet s;
        for (std::size_t i = 0; i < m; ++i)
            if (mask & (std::uint64_t{1} << i)) s.push_back(others[i]);
        if (is_blanket(t, v, s, ortho_tol)) blankets.push_back(std::move(s));
    }

    std::vector<IndexSet> minimal;
    for (const auto& s : blankets) {
        bool has_proper_subset = false;
        for (const auto& o : blankets)
            if (o.size() < s.size() && std::includes(s.begin(), s.end(), o.begin(), o.end())) {
                has_proper_subset = true;
                break;
            }
        if (!has_proper_subset) minimal.push_back(s);
    }
    std::sort(minimal.begin(), minimal.end(), [](const IndexSet& a, const IndexSet& b) {
        if (a.size() != b.size()) return a.size() < b.size();
        return a < b;
    });
    return minimal;
}

// Signed mean of residual cosines over the non-member, non-target vectors;
// terms with a degenerate residual norm are dropped. Mirrors the score's
// definition, not its implementation.
struct GmbOracle {
    double cbar = 0.0;
    std::size_t excluded = 0;
};

inline GmbOracle gmb_score(const EmbeddingTable& t, std::size_t v, const IndexSet& m,
                           double zero_tol = 1e-10) {
    const auto span = columns(t, m);
    const Vec rv = residual(t.vector(v), span);
    GmbOracle out;
    IndexSet test;
    for (std::size_t u = 0; u < t.size(); ++u)
        if (u != v && std::find(m.begin(), m.end(), u) == m.end()) test.push_back(u);
    if (rv.norm() <= zero_tol) {
        out.excluded = test.size();
        return out;
    }
    double sum = 0.0;
    std::size_t kept = 0;
    for (std::size_t u : test) {
        const Vec ru = residual(t.vector(u), span);
        if (ru.norm() <= zero_tol) {
            ++out.excluded;
            continue;
        }
        sum += rv.dot(ru) / (rv.norm() * ru.norm());
        ++kept;
    }
    out.cbar = kept == 0 ? 0.0 : sum / static_cast<double>(kept);
    return out;
}

}  // namespace oracles
