#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "olens/geometry.hpp"
#include "olens/independence.hpp"
#include "olens/rng.hpp"

namespace olens {

// A minimal Markov blanket of a target, together with the target's
// projection onto the blanket's span.
struct BoundarySet {
    std::size_t target = 0;
    IndexSet members;
    Vec projection_of_target;
};

struct GmbScore {
    double cbar = 0.0;       // mean signed residual cosine over the test set
    std::size_t excluded = 0;  // degenerate terms dropped from the mean
};

// Result of the randomized generalized-boundary search.
struct GmbResult {
    std::size_t target = 0;
    IndexSet members;
    double cbar = 0.0;
    std::size_t excluded = 0;
    // Top-K candidates in rank order: (index, aggregate score).
    std::vector<std::pair<std::size_t, double>> candidate_pool;
    std::size_t n_r = 0, d_r = 0, k = 0;
    std::uint64_t seed = 0;
};

// True iff the target is partially orthogonal to every vector outside
// M ∪ {target}, given M. The span of M is built once.
inline bool is_markov_blanket(const EmbeddingTable& table, std::size_t v, const IndexSet& m,
                              const Tolerance& tol = {}) {
    table.check_index(v);
    for (std::size_t i : m) table.check_index(i);
    if (detail::set_contains(m, v))
        throw invalid_input_error("is_markov_blanket: target must not lie in M");
    IndexSet rest;
    for (std::size_t u = 0; u < table.size(); ++u)
        if (u != v && !detail::set_contains(m, u)) rest.push_back(u);
    return set_partially_orthogonal(table, IndexSet{v}, rest, m, tol);
}

namespace detail {

inline bool is_strict_superset_of_any(const IndexSet& candidate,
                                      const std::vector<IndexSet>& found) {
    for (const auto& f : found)
        if (f.size() < candidate.size() &&
            std::includes(candidate.begin(), candidate.end(), f.begin(), f.end()))
            return true;
    return false;
}

}  // namespace detail

// All inclusion-minimal Markov blankets of the target, ordered by
// (cardinality, lexicographic members). Enumerates subsets of the other
// vectors in nondecreasing cardinality; any superset of a found boundary
// is pruned, which is exact because supersets of blankets are blankets
// (weak union holds for partial orthogonality).
inline std::vector<BoundarySet> enumerate_markov_boundaries(
    const EmbeddingTable& table, std::size_t v, const Tolerance& tol = {},
    std::size_t max_size = std::numeric_limits<std::size_t>::max(), bool allow_large = false) {
    table.check_index(v);
    const std::size_t n = table.size();
    if (!allow_large && n > 20)
        throw guard_error(
            "enumerate_markov_boundaries: refusing table with more than 20 vectors "
            "(subset enumeration is exponential); pass allow_large to override");

    IndexSet others;
    for (std::size_t u = 0; u < n; ++u)
        if (u != v) others.push_back(u);

    std::vector<IndexSet> found;
    const std::size_t limit = std::min(max_size, others.size());
    for (std::size_t k = 0; k <= limit; ++k) {
        // k-combinations of `others` in lexicographic order.
        std::vector<std::size_t> pos(k);
        for (std::size_t i = 0; i < k; ++i) pos[i] = i;
        while (true) {
            IndexSet m;
            m.reserve(k);
            for (std::size_t p : pos) m.push_back(others[p]);
            if (!detail::is_strict_superset_of_any(m, found) && is_markov_blanket(table, v, m, tol))
                found.push_back(m);
            if (k == 0) break;
            // advance odometer
            std::size_t i = k;
            while (i > 0 && pos[i - 1] == others.size() - k + (i - 1)) --i;
            if (i == 0) break;
            ++pos[i - 1];
            for (std::size_t j = i; j < k; ++j) pos[j] = pos[j - 1] + 1;
        }
    }

    std::vector<BoundarySet> out;
    out.reserve(found.size());
    for (auto& m : found) {
        const Subspace s = orthonormal_basis_of_columns(table.coords(), m, tol);
        out.push_back({v, std::move(m), project(table.vector(v), s)});
    }
    return out;
}

// Mean signed cosine between the target's residual and each test vector's
// residual after projecting out span(M). Terms whose residual is
// numerically zero are dropped from both numerator and denominator; a
// numerically zero target residual forces the score to exactly 0.
inline GmbScore gmb_score(const EmbeddingTable& table, std::size_t v, const IndexSet& m,
                          const Tolerance& tol = {}) {
    table.check_index(v);
    for (std::size_t i : m) table.check_index(i);
    if (detail::set_contains(m, v))
        throw invalid_input_error("gmb_score: target must not lie in M");

    IndexSet test;
    for (std::size_t u = 0; u < table.size(); ++u)
        if (u != v && !detail::set_contains(m, u)) test.push_back(u);
    if (test.empty()) throw invalid_input_error("gmb_score: test set is empty");

    const Subspace s = orthonormal_basis_of_columns(table.coords(), m, tol);
    const Vec rv = residual(table.vector(v), s);
    if (rv.norm() <= tol.zero_tol) return {0.0, test.size()};

    double sum = 0.0;
    std::size_t used = 0, excluded = 0;
    for (std::size_t u : test) {
        const Vec ru = residual(table.vector(u), s);
        const CosineResult c = cosine(rv, ru, tol);
        if (c.degenerate) {
            ++excluded;
            continue;
        }
        sum += c.value;
        ++used;
    }
    return {used > 0 ? sum / static_cast<double>(used) : 0.0, excluded};
}

namespace detail {

// Per-vector aggregate Σ_i cos over n_r random conditioning sets of size
// d_r, each drawn from a stream seeded by (seed, round). Round order is
// fixed so the sums are reproducible.
inline std::vector<double> gmb_aggregates(const EmbeddingTable& table, std::size_t v,
                                          std::size_t n_r, std::size_t d_r, std::uint64_t seed,
                                          const Tolerance& tol) {
    const std::size_t n = table.size();
    std::vector<double> agg(n, 0.0);
    for (std::size_t round = 0; round < n_r; ++round) {
        SplitMix64 rng(mix_seed(seed, round));
        const auto pick = rng.sample_without_replacement(n - 1, d_r);
        IndexSet mi;
        mi.reserve(d_r);
        for (std::size_t p : pick) mi.push_back(p < v ? p : p + 1);
        const Subspace s = orthonormal_basis_of_columns(table.coords(), mi, tol);
        const Vec rv = residual(table.vector(v), s);
        for (std::size_t u = 0; u < n; ++u) {
            if (u == v) continue;
            const CosineResult c = cosine(rv, residual(table.vector(u), s), tol);
            if (!c.degenerate) agg[u] += c.value;
        }
    }
    return agg;
}

// All non-targets ranked by (aggregate descending, index ascending).
inline std::vector<std::pair<std::size_t, double>> rank_candidates(const std::vector<double>& agg,
                                                                   std::size_t v) {
    std::vector<std::pair<std::size_t, double>> ranked;
    ranked.reserve(agg.size() - 1);
    for (std::size_t u = 0; u < agg.size(); ++u)
        if (u != v) ranked.emplace_back(u, agg[u]);
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return ranked;
}

struct SubsetScore {
    IndexSet members;
    double cbar = 0.0;
    std::size_t excluded = 0;
    bool valid = false;
};

// Two-tier preference: subsets scoring within gmb_tol of zero are ranked
// by (cardinality, |cbar|, members); all others by (|cbar|, cardinality,
// members). Any qualifying subset beats every non-qualifying one.
inline bool subset_better(const SubsetScore& a, const SubsetScore& b, double gmb_tol) {
    if (!b.valid) return a.valid;
    if (!a.valid) return false;
    const bool qa = std::abs(a.cbar) <= gmb_tol;
    const bool qb = std::abs(b.cbar) <= gmb_tol;
    if (qa != qb) return qa;
    const double aa = std::abs(a.cbar), ab = std::abs(b.cbar);
    if (qa) {
        if (a.members.size() != b.members.size()) return a.members.size() < b.members.size();
        if (aa != ab) return aa < ab;
    } else {
        if (aa != ab) return aa < ab;
        if (a.members.size() != b.members.size()) return a.members.size() < b.members.size();
    }
    return a.members < b.members;
}

}  // namespace detail

// Randomized generalized-boundary search: rank candidates by aggregate
// residual cosine over n_r random conditioning sets, then exhaustively
// score every nonempty subset of the top K. Deterministic for a fixed
// seed. Subsets covering all non-targets are skipped (no test set).
inline GmbResult find_generalized_mb(const EmbeddingTable& table, std::size_t v, std::size_t n_r,
                                     std::size_t d_r, std::size_t k, std::uint64_t seed,
                                     const Tolerance& tol = {}, double gmb_tol = 0.02) {
    table.check_index(v);
    const std::size_t n = table.size();
    if (n_r < 1) throw invalid_input_error("find_generalized_mb: n_r must be >= 1");
    if (d_r < 1 || d_r > n - 1)
        throw invalid_input_error("find_generalized_mb: d_r must be in [1, n-1]");
    if (k < 1 || k > n - 1) throw invalid_input_error("find_generalized_mb: K must be in [1, n-1]");
    if (k > 20) throw guard_error("find_generalized_mb: refusing K > 20 (2^K subsets)");

    const auto agg = detail::gmb_aggregates(table, v, n_r, d_r, seed, tol);
    auto ranked = detail::rank_candidates(agg, v);
    ranked.resize(k);

    detail::SubsetScore best;
    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << k); ++mask) {
        IndexSet members;
        for (std::size_t bit = 0; bit < k; ++bit)
            if (mask & (std::uint64_t{1} << bit)) members.push_back(ranked[bit].first);
        std::sort(members.begin(), members.end());
        if (members.size() == n - 1) continue;
        const GmbScore sc = gmb_score(table, v, members, tol);
        detail::SubsetScore cand{std::move(members), sc.cbar, sc.excluded, true};
        if (detail::subset_better(cand, best, gmb_tol)) best = std::move(cand);
    }
    if (!best.valid)
        throw invalid_input_error("find_generalized_mb: no scorable subset (K covers all vectors)");

    GmbResult out;
    out.target = v;
    out.members = std::move(best.members);
    out.cbar = best.cbar;
    out.excluded = best.excluded;
    out.candidate_pool = std::move(ranked);
    out.n_r = n_r;
    out.d_r = d_r;
    out.k = k;
    out.seed = seed;
    return out;
}

struct SweepEntry {
    std::size_t k = 0;
    double best_abs_cbar = 0.0;
    IndexSet members;
};

// Best achievable |cbar| for each pool size K in [k_lo, k_hi]. The
// aggregates are computed once; the top-K pools are nested prefixes of one
// ranking, so the per-K minima are nonincreasing by construction.
inline std::vector<SweepEntry> sweep_generalized_mb(const EmbeddingTable& table, std::size_t v,
                                                    std::size_t n_r, std::size_t d_r,
                                                    std::size_t k_lo, std::size_t k_hi,
                                                    std::uint64_t seed, const Tolerance& tol = {}) {
    table.check_index(v);
    const std::size_t n = table.size();
    if (k_lo < 1 || k_lo > k_hi) throw invalid_input_error("sweep: need 1 <= k_lo <= k_hi");
    if (k_hi > n - 1) throw invalid_input_error("sweep: k_hi must be <= n-1");
    if (k_hi > 20) throw guard_error("sweep: refusing K > 20 (2^K subsets)");
    if (n_r < 1) throw invalid_input_error("sweep: n_r must be >= 1");
    if (d_r < 1 || d_r > n - 1) throw invalid_input_error("sweep: d_r must be in [1, n-1]");

    const auto agg = detail::gmb_aggregates(table, v, n_r, d_r, seed, tol);
    auto ranked = detail::rank_candidates(agg, v);
    ranked.resize(k_hi);

    struct Best {
        bool valid = false;
        double abs_cbar = 0.0;
        IndexSet members;
    };
    std::vector<Best> best(k_hi + 1);

    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << k_hi); ++mask) {
        IndexSet members;
        std::size_t max_rank = 0;  // 1-based rank of the worst-ranked member
        for (std::size_t bit = 0; bit < k_hi; ++bit)
            if (mask & (std::uint64_t{1} << bit)) {
                members.push_back(ranked[bit].first);
                max_rank = bit + 1;
            }
        std::sort(members.begin(), members.end());
        if (members.size() == n - 1) continue;
        const double a = std::abs(gmb_score(table, v, members, tol).cbar);
        Best& slot = best[max_rank];
        if (!slot.valid || a < slot.abs_cbar ||
            (a == slot.abs_cbar && (members.size() < slot.members.size() ||
                                    (members.size() == slot.members.size() &&
                                     members < slot.members)))) {
            slot = {true, a, members};
        }
    }

    // A subset first available at rank r stays available for every K >= r.
    std::vector<SweepEntry> out;
    Best running;
    for (std::size_t kk = 1; kk <= k_hi; ++kk) {
        const Best& slot = best[kk];
        if (slot.valid &&
            (!running.valid || slot.abs_cbar < running.abs_cbar ||
             (slot.abs_cbar == running.abs_cbar &&
              (slot.members.size() < running.members.size() ||
               (slot.members.size() == running.members.size() && slot.members < running.members)))))
            running = slot;
        if (kk >= k_lo) {
            if (!running.valid)
                throw invalid_input_error("sweep: no scorable subset at K = " + std::to_string(kk));
            out.push_back({kk, running.abs_cbar, running.members});
        }
    }
    return out;
}

}  // namespace olens
