#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "olens/independence.hpp"
#include "olens/rng.hpp"

namespace olens {
namespace synth {

namespace detail {

inline Vec gaussian_vec(SplitMix64& rng, Eigen::Index d) {
    Vec v(d);
    for (Eigen::Index i = 0; i < d; ++i) v(i) = rng.normal();
    return v;
}

// Gram-Schmidt a fresh random direction against the given columns.
inline Vec random_unit_orthogonal_to(SplitMix64& rng, Eigen::Index d,
                                     const std::vector<Vec>& against) {
    for (;;) {
        Vec v = gaussian_vec(rng, d);
        for (const Vec& a : against) v -= a.dot(v) * a;
        const double n = v.norm();
        if (n > 1e-6) return v / n;
    }
}

}  // namespace detail

// Random table of standard-normal vectors, labels "w0".."w{n-1}".
inline EmbeddingTable random_table(std::uint64_t seed, std::size_t n, std::size_t d) {
    SplitMix64 rng(seed);
    Mat m(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(n));
    for (Eigen::Index c = 0; c < m.cols(); ++c)
        for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = rng.normal();
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < n; ++i) labels.push_back("w" + std::to_string(i));
    return EmbeddingTable(std::move(labels), std::move(m));
}

// Random table guaranteed linearly independent (requires n <= d). Gaussian
// draws are a.s. independent; the rank is still verified and the draw
// retried on a new derived seed if numerically deficient.
inline EmbeddingTable random_independent_table(std::uint64_t seed, std::size_t n, std::size_t d) {
    if (n > d)
        throw invalid_input_error("random_independent_table: need n <= d for independence");
    for (std::uint64_t attempt = 0;; ++attempt) {
        EmbeddingTable t = random_table(mix_seed(seed, attempt), n, d);
        Eigen::JacobiSVD<Mat> svd(t.coords());
        const auto& sv = svd.singularValues();
        if (sv(sv.size() - 1) > 1e-6 * sv(0)) return t;
    }
}

// Three identical vectors: the standard intersection-axiom failure for
// linearly dependent sets. x is orthogonal to y given {z} and to z given
// {y} (both residuals vanish), yet x is not orthogonal to {y, z} jointly.
inline EmbeddingTable intersection_violation_table() {
    Mat m(2, 3);
    m << 1, 1, 1, 0, 0, 0;
    return EmbeddingTable({"x", "y", "z"}, std::move(m));
}

inline UndirectedGraph path_graph(std::size_t n) {
    UndirectedGraph g(n);
    for (std::size_t i = 0; i + 1 < n; ++i) g.add_edge(i, i + 1);
    return g;
}

inline UndirectedGraph complete_graph(std::size_t n) {
    UndirectedGraph g(n);
    for (std::size_t i = 0; i + 1 < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) g.add_edge(i, j);
    return g;
}

inline UndirectedGraph edgeless_graph(std::size_t n) { return UndirectedGraph(n); }

// Random recursive tree: vertex i >= 1 attaches to a uniform earlier vertex.
inline UndirectedGraph random_tree(std::uint64_t seed, std::size_t n) {
    SplitMix64 rng(seed);
    UndirectedGraph g(n);
    for (std::size_t i = 1; i < n; ++i) g.add_edge(i, static_cast<std::size_t>(rng.below(i)));
    return g;
}

// Random connected graph: a random tree plus each remaining pair
// independently with probability p.
inline UndirectedGraph random_connected_graph(std::uint64_t seed, std::size_t n, double p) {
    SplitMix64 rng(seed);
    UndirectedGraph g(n);
    for (std::size_t i = 1; i < n; ++i) g.add_edge(i, static_cast<std::size_t>(rng.below(i)));
    for (std::size_t i = 0; i + 1 < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (!g.has_edge(i, j) && rng.uniform01() < p) g.add_edge(i, j);
    return g;
}

// Erdos-Renyi graph (possibly disconnected).
inline UndirectedGraph random_graph(std::uint64_t seed, std::size_t n, double p) {
    SplitMix64 rng(seed);
    UndirectedGraph g(n);
    for (std::size_t i = 0; i + 1 < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (rng.uniform01() < p) g.add_edge(i, j);
    return g;
}

// ---------------------------------------------------------------------------
// Planted generalized-boundary instance
// ---------------------------------------------------------------------------
//
// 64 unit vectors in R^64. Three planted vectors p_i = (f + g_i)/sqrt(2)
// share a center direction f, with g_i 120 degrees apart in a plane
// orthogonal to f; the target IS the center f, so it lies in span(planted)
// with equal positive weight on each planted vector. The target factors as
// 0.8*w + 0.6*q with w, q an orthonormal pair inside span(planted); the 60
// distractors are 0.5*q + (sqrt(3)/2)*noise with isotropic unit noise drawn
// orthogonal to span(planted).
//
// Consequences used by the tests: the score of the full planted set is
// exactly 0 (degenerate target residual), every proper subset of it scores
// far from 0, and every planted vector keeps a strong positive cosine with
// the target while distractors sit near 0.3.
struct PlantedGmb {
    EmbeddingTable table;
    std::string target_label;
    std::vector<std::string> planted_labels;
    std::size_t target_index = 0;
    IndexSet planted_indices;
};

inline PlantedGmb planted_gmb_instance(std::uint64_t seed, std::size_t distractors = 60,
                                       Eigen::Index dim = 64) {
    if (dim < 4) throw invalid_input_error("planted_gmb_instance: dim must be >= 4");
    SplitMix64 rng(seed);

    const Vec f1 = detail::random_unit_orthogonal_to(rng, dim, {});
    const Vec f2 = detail::random_unit_orthogonal_to(rng, dim, {f1});
    const Vec f3 = detail::random_unit_orthogonal_to(rng, dim, {f1, f2});

    const double s32 = std::sqrt(3.0) / 2.0;
    const Vec g1 = f2;
    const Vec g2 = -0.5 * f2 + s32 * f3;
    const Vec g3 = -0.5 * f2 - s32 * f3;

    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    std::vector<Vec> planted = {inv_sqrt2 * (f1 + g1), inv_sqrt2 * (f1 + g2),
                                inv_sqrt2 * (f1 + g3)};
    const Vec target = f1;
    // q at 60 degrees within the g-plane: full support on every planted
    // vector, so no proper subset of the planted set contains it.
    const Vec q = 0.6 * f1 + 0.8 * (0.5 * f2 + s32 * f3);

    std::vector<std::string> labels;
    Mat m(dim, static_cast<Eigen::Index>(1 + planted.size() + distractors));
    Eigen::Index col = 0;
    labels.push_back("target");
    m.col(col++) = target;
    for (std::size_t i = 0; i < planted.size(); ++i) {
        labels.push_back("core" + std::to_string(i + 1));
        m.col(col++) = planted[i];
    }
    for (std::size_t j = 0; j < distractors; ++j) {
        const Vec noise = detail::random_unit_orthogonal_to(rng, dim, {f1, f2, f3});
        std::string name = "noise" + std::to_string(j + 1);
        if (name.size() < 7) name.insert(5, "0");
        labels.push_back(name);
        m.col(col++) = 0.5 * q + s32 * noise;
    }

    PlantedGmb out{EmbeddingTable(std::move(labels), std::move(m)), "target",
                   {"core1", "core2", "core3"}, 0, {1, 2, 3}};
    return out;
}

// ---------------------------------------------------------------------------
// Clustered categories instance (conditioning-matrix demo)
// ---------------------------------------------------------------------------
//
// Each category is a unit center plus members center*cos + noise*sin with
// mutually near-orthogonal centers. The category label's own embedding is
// its center, so conditioning on it collapses intra-category similarity.
struct ClusteredCategories {
    EmbeddingTable table;
    // category label -> member labels (the category label itself is a
    // separate record in the table)
    std::vector<std::pair<std::string, std::vector<std::string>>> categories;
};

inline ClusteredCategories clustered_categories_instance(std::uint64_t seed,
                                                         std::size_t n_categories = 4,
                                                         std::size_t members_per_category = 6,
                                                         Eigen::Index dim = 32,
                                                         double noise_angle = 0.45) {
    if (static_cast<Eigen::Index>(n_categories) > dim)
        throw invalid_input_error("clustered_categories_instance: too many categories");
    SplitMix64 rng(seed);

    std::vector<Vec> centers;
    for (std::size_t k = 0; k < n_categories; ++k)
        centers.push_back(detail::random_unit_orthogonal_to(rng, dim, centers));

    const double c = std::cos(noise_angle), s = std::sin(noise_angle);
    std::vector<std::string> labels;
    std::vector<Vec> cols;
    std::vector<std::pair<std::string, std::vector<std::string>>> categories;
    for (std::size_t k = 0; k < n_categories; ++k) {
        const std::string cat = "cat" + std::to_string(k + 1);
        labels.push_back(cat);
        cols.push_back(centers[k]);
        std::vector<std::string> members;
        for (std::size_t j = 0; j < members_per_category; ++j) {
            const Vec noise = detail::random_unit_orthogonal_to(rng, dim, {centers[k]});
            members.push_back(cat + "_m" + std::to_string(j + 1));
            labels.push_back(members.back());
            cols.push_back(c * centers[k] + s * noise);
        }
        categories.emplace_back(cat, std::move(members));
    }
    Mat m(dim, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < cols.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = cols[i];
    return {EmbeddingTable(std::move(labels), std::move(m)), std::move(categories)};
}

// ---------------------------------------------------------------------------
// Ranking instance (random-subspace projection demo)
// ---------------------------------------------------------------------------
//
// The target's nearest neighbor by raw cosine ("imposter") lives in a
// noise subspace that also holds a 40-vector crowd, so random conditioning
// sets hit and remove it; the semantically tied vector shares the target's
// direction outside that subspace and overtakes after projection.
struct RankingInstance {
    EmbeddingTable table;
    std::string target_label = "target";
    std::string tied_label = "tied";
    std::string imposter_label = "imposter";
};

inline RankingInstance ranking_instance(std::uint64_t seed, std::size_t crowd = 40,
                                        std::size_t noise_dim = 8, Eigen::Index dim = 24) {
    SplitMix64 rng(seed);

    // Orthonormal frame: s (semantic), b_1..b_noise_dim (noise subspace).
    std::vector<Vec> frame;
    frame.push_back(detail::random_unit_orthogonal_to(rng, dim, frame));  // s
    for (std::size_t i = 0; i < noise_dim; ++i)
        frame.push_back(detail::random_unit_orthogonal_to(rng, dim, frame));
    const Vec s = frame[0];

    auto noise_unit = [&]() {
        Vec v = Vec::Zero(dim);
        double norm2 = 0.0;
        std::vector<double> w(noise_dim);
        for (std::size_t i = 0; i < noise_dim; ++i) {
            w[i] = rng.normal();
            norm2 += w[i] * w[i];
        }
        for (std::size_t i = 0; i < noise_dim; ++i) v += (w[i] / std::sqrt(norm2)) * frame[i + 1];
        return v;
    };

    const Vec nhat = noise_unit();
    const Vec target = 0.6 * s + 0.8 * nhat;
    const Vec spread = detail::random_unit_orthogonal_to(rng, dim, frame);
    const Vec tied = 0.9 * s + std::sqrt(1.0 - 0.81) * spread;
    Vec imp_noise = noise_unit();
    imp_noise -= nhat.dot(imp_noise) * nhat;
    imp_noise.normalize();
    const Vec imposter = 0.95 * nhat + std::sqrt(1.0 - 0.95 * 0.95) * imp_noise;

    std::vector<std::string> labels = {"target", "tied", "imposter"};
    std::vector<Vec> cols = {target, tied, imposter};
    for (std::size_t j = 0; j < crowd; ++j) {
        labels.push_back("crowd" + std::to_string(j + 1));
        cols.push_back(noise_unit());
    }
    Mat m(dim, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < cols.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = cols[i];
    return {EmbeddingTable(std::move(labels), std::move(m)), "target", "tied", "imposter"};
}

// ---------------------------------------------------------------------------
// Principal-angle instance
// ---------------------------------------------------------------------------
//
// Boundary span {center1, center2}; the reference is center1 plus small
// noise, so its angle to the boundary span sits far below random chance.
struct AnglesInstance {
    EmbeddingTable table;
    std::vector<std::string> boundary_labels;
    std::vector<std::string> reference_labels;
};

inline AnglesInstance angles_instance(std::uint64_t seed, std::size_t fillers = 30,
                                      Eigen::Index dim = 32) {
    SplitMix64 rng(seed);
    const Vec c1 = detail::random_unit_orthogonal_to(rng, dim, {});
    const Vec c2 = detail::random_unit_orthogonal_to(rng, dim, {c1});
    const Vec noise = detail::random_unit_orthogonal_to(rng, dim, {c1, c2});
    Vec ref = c1 + 0.12 * noise;
    ref.normalize();

    std::vector<std::string> labels = {"center1", "center2", "description"};
    std::vector<Vec> cols = {c1, c2, ref};
    for (std::size_t j = 0; j < fillers; ++j) {
        labels.push_back("filler" + std::to_string(j + 1));
        cols.push_back(detail::random_unit_orthogonal_to(rng, dim, {}));
    }
    Mat m(dim, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < cols.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = cols[i];
    return {EmbeddingTable(std::move(labels), std::move(m)),
            {"center1", "center2"},
            {"description"}};
}

}  // namespace synth
}  // namespace olens
