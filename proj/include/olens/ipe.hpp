#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "olens/geometry.hpp"
#include "olens/independence.hpp"
#include "olens/rng.hpp"

namespace olens {

// A_eps = I + eps * adjacency. Unit diagonal, symmetric by construction.
struct AdjustedAdjacency {
    UndirectedGraph graph;
    double epsilon = 0.0;
    Mat matrix;
};

inline AdjustedAdjacency adjusted_adjacency(const UndirectedGraph& g, double epsilon) {
    const auto n = static_cast<Eigen::Index>(g.vertex_count());
    Mat m = Mat::Identity(n, n) + epsilon * g.adjacency();
    return {g, epsilon, std::move(m)};
}

struct PerfectnessWitness {
    enum class Kind { singular_matrix, singular_submatrix, spurious_zero, missing_zero };
    Kind kind = Kind::singular_matrix;
    IndexSet subset;       // the principal index set I
    std::size_t i = 0, j = 0;  // offending vertex pair (members of subset), if any

    std::string describe() const {
        std::ostringstream os;
        switch (kind) {
            case Kind::singular_matrix: os << "A_eps is singular"; break;
            case Kind::singular_submatrix: os << "principal submatrix is singular"; break;
            case Kind::spurious_zero:
                os << "inverse entry is zero but vertices " << i << "," << j
                   << " are not separated";
                break;
            case Kind::missing_zero:
                os << "inverse entry is nonzero but vertices " << i << "," << j
                   << " are separated";
                break;
        }
        os << " (subset {";
        for (std::size_t t = 0; t < subset.size(); ++t) os << (t ? "," : "") << subset[t];
        os << "})";
        return os.str();
    }
};

struct PerfectnessResult {
    bool perfect = false;
    std::optional<PerfectnessWitness> witness;
};

// Checks the definition exhaustively: A_eps invertible, and for every
// principal index set I, zeros of the submatrix inverse coincide with
// graph separation given the complement of I. First violation in subset
// bitmask order (then pair order) is returned as witness.
inline PerfectnessResult is_perfect_perturbation(const UndirectedGraph& g, double epsilon,
                                                 const Tolerance& tol = {},
                                                 std::size_t max_n_exhaustive = 14) {
    const std::size_t n = g.vertex_count();
    if (n > max_n_exhaustive)
        throw guard_error("is_perfect_perturbation: refusing graph with more than " +
                          std::to_string(max_n_exhaustive) +
                          " vertices (2^n principal submatrices)");
    const Mat a = adjusted_adjacency(g, epsilon).matrix;

    {
        Eigen::FullPivLU<Mat> lu(a);
        if (!lu.isInvertible()) {
            IndexSet full;
            for (std::size_t v = 0; v < n; ++v) full.push_back(v);
            return {false,
                    PerfectnessWitness{PerfectnessWitness::Kind::singular_matrix, full, 0, 0}};
        }
    }

    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
        IndexSet subset;
        for (std::size_t v = 0; v < n; ++v)
            if (mask & (std::uint64_t{1} << v)) subset.push_back(v);
        if (subset.size() < 2) continue;

        const auto m = static_cast<Eigen::Index>(subset.size());
        Mat sub(m, m);
        for (Eigen::Index r = 0; r < m; ++r)
            for (Eigen::Index c = 0; c < m; ++c)
                sub(r, c) = a(static_cast<Eigen::Index>(subset[static_cast<std::size_t>(r)]),
                              static_cast<Eigen::Index>(subset[static_cast<std::size_t>(c)]));

        Eigen::FullPivLU<Mat> lu(sub);
        if (!lu.isInvertible())
            return {false, PerfectnessWitness{PerfectnessWitness::Kind::singular_submatrix,
                                              subset, subset[0], subset[0]}};
        const Mat inv = lu.inverse();

        // Separation given V \ I restricted to pairs inside I equals
        // disconnection inside the induced subgraph on I.
        std::vector<int> comp(subset.size(), -1);
        int ncomp = 0;
        for (std::size_t s = 0; s < subset.size(); ++s) {
            if (comp[s] >= 0) continue;
            std::vector<std::size_t> stack{s};
            comp[s] = ncomp;
            while (!stack.empty()) {
                const std::size_t cur = stack.back();
                stack.pop_back();
                for (std::size_t t = 0; t < subset.size(); ++t)
                    if (comp[t] < 0 && g.has_edge(subset[cur], subset[t])) {
                        comp[t] = ncomp;
                        stack.push_back(t);
                    }
            }
            ++ncomp;
        }

        for (std::size_t r = 0; r + 1 < subset.size(); ++r)
            for (std::size_t c = r + 1; c < subset.size(); ++c) {
                const bool zero = std::abs(inv(static_cast<Eigen::Index>(r),
                                               static_cast<Eigen::Index>(c))) <= tol.ortho_tol;
                const bool separated = comp[r] != comp[c];
                if (zero && !separated)
                    return {false,
                            PerfectnessWitness{PerfectnessWitness::Kind::spurious_zero, subset,
                                               subset[r], subset[c]}};
                if (!zero && separated)
                    return {false,
                            PerfectnessWitness{PerfectnessWitness::Kind::missing_zero, subset,
                                               subset[r], subset[c]}};
            }
    }
    return {true, std::nullopt};
}

inline std::vector<double> default_epsilon_candidates(const UndirectedGraph& g) {
    const double base = 0.5 / (static_cast<double>(g.max_degree()) + 1.0);
    std::vector<double> out;
    for (double f : {1.0, 0.9, 1.1, 0.8, 1.2, 0.7, 1.3, 0.6, 1.4, 0.5}) out.push_back(base * f);
    return out;
}

// First candidate that is a perfect perturbation factor; throws with every
// candidate's witness otherwise.
inline double find_perfect_epsilon(const UndirectedGraph& g, std::vector<double> candidates = {},
                                   const Tolerance& tol = {},
                                   std::size_t max_n_exhaustive = 14) {
    if (candidates.empty()) candidates = default_epsilon_candidates(g);
    std::ostringstream failures;
    for (double eps : candidates) {
        const PerfectnessResult r = is_perfect_perturbation(g, eps, tol, max_n_exhaustive);
        if (r.perfect) return eps;
        failures << "\n  eps=" << eps << ": " << (r.witness ? r.witness->describe() : "rejected");
    }
    throw not_found_error("find_perfect_epsilon: no candidate is perfect:" + failures.str());
}

// Rows of an embedding map built from a graph; gram = rows * rows^T.
struct IpeMap {
    UndirectedGraph graph;
    double epsilon = 0.0;
    Mat rows;  // n x n, row i is the embedding of vertex i
    Mat gram;  // pairwise inner products of rows
    bool normalized = false;
};

// Spectral construction: with A = (I + eps*Adj)^{-1} = U diag(1/lambda) U^T,
// row i = U_i diag(lambda^{-1/2}), so the gram matrix equals A exactly.
// Requires I + eps*Adj positive definite so the square root is real.
inline IpeMap construct_ipe(const UndirectedGraph& g, double epsilon, bool normalize = false) {
    const Mat a_eps = adjusted_adjacency(g, epsilon).matrix;
    Eigen::SelfAdjointEigenSolver<Mat> es(a_eps);
    const Vec lambda = es.eigenvalues();  // ascending
    const double scale = std::max(std::abs(lambda(0)), std::abs(lambda(lambda.size() - 1)));
    if (lambda(0) <= scale * 1e-12)
        throw construction_error(
            "construct_ipe: I + eps*adjacency is not positive definite (eigenvalue " +
            std::to_string(lambda(0)) + ")");

    Mat rows = es.eigenvectors();  // columns are eigenvectors; row i = U_i
    for (Eigen::Index c = 0; c < rows.cols(); ++c) rows.col(c) /= std::sqrt(lambda(c));

    IpeMap map;
    map.graph = g;
    map.epsilon = epsilon;
    if (normalize) {
        for (Eigen::Index r = 0; r < rows.rows(); ++r) rows.row(r).normalize();
        map.normalized = true;
    }
    map.gram = rows * rows.transpose();
    map.rows = std::move(rows);
    return map;
}

// The map's rows as a labeled table ("v0".."v{n-1}"), one vector per vertex.
inline EmbeddingTable ipe_table(const IpeMap& map) {
    std::vector<std::string> labels;
    for (Eigen::Index i = 0; i < map.rows.rows(); ++i) labels.push_back("v" + std::to_string(i));
    return EmbeddingTable(std::move(labels), map.rows.transpose());
}

struct IpeMismatch {
    std::size_t i = 0, j = 0;
    IndexSet c;
    bool orthogonal = false;  // verdict from the embedding rows
    bool separated = false;   // verdict from the graph
};

struct IpeVerification {
    std::size_t triples_checked = 0;
    std::vector<IpeMismatch> mismatches;
    bool faithful() const { return mismatches.empty(); }
};

// Compares partial orthogonality of the rows against graph separation on
// every (i, j, C) with i < j and C ranging over all subsets of the other
// vertices. Set-level statements follow from these by composition.
inline IpeVerification verify_ipe(const EmbeddingTable& rows, const UndirectedGraph& g,
                                  const Tolerance& tol = {}, std::size_t max_n = 10) {
    const std::size_t n = rows.size();
    if (n != g.vertex_count())
        throw invalid_input_error("verify_ipe: table size does not match vertex count");
    if (n > max_n)
        throw guard_error("verify_ipe: refusing more than " + std::to_string(max_n) +
                          " vertices (exhaustive triple enumeration)");

    IpeVerification out;
    for (std::size_t i = 0; i + 1 < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            IndexSet others;
            for (std::size_t v = 0; v < n; ++v)
                if (v != i && v != j) others.push_back(v);
            const std::size_t m = others.size();
            for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
                IndexSet c;
                for (std::size_t t = 0; t < m; ++t)
                    if (mask & (std::uint64_t{1} << t)) c.push_back(others[t]);
                const bool ortho = partially_orthogonal(rows, i, j, c, tol);
                const bool sep = graph_separated(g, {i}, {j}, c);
                ++out.triples_checked;
                if (ortho != sep) out.mismatches.push_back({i, j, c, ortho, sep});
            }
        }
    return out;
}

// Gaussian pairwise structure: edge (i, j) iff the precision entry is
// nonzero beyond tol.
inline UndirectedGraph imap_from_precision(const Mat& precision, const Tolerance& tol = {}) {
    if (precision.rows() != precision.cols())
        throw invalid_input_error("imap_from_precision: matrix must be square");
    const double scale = precision.cwiseAbs().maxCoeff();
    if ((precision - precision.transpose()).cwiseAbs().maxCoeff() > 1e-8 * std::max(scale, 1.0))
        throw invalid_input_error("imap_from_precision: matrix must be symmetric");
    Eigen::SelfAdjointEigenSolver<Mat> es(precision);
    if (es.eigenvalues()(0) <= 0.0)
        throw invalid_input_error("imap_from_precision: matrix must be positive definite "
                                  "(eigenvalue " +
                                  std::to_string(es.eigenvalues()(0)) + ")");
    const std::size_t n = static_cast<std::size_t>(precision.rows());
    UndirectedGraph g(n);
    for (std::size_t i = 0; i + 1 < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(precision(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) >
                tol.ortho_tol)
                g.add_edge(i, j);
    return g;
}

// Target dimension and constants for the distortion bound.
struct ReductionPlan {
    std::size_t n = 0;
    std::size_t k = 0;
    double epsilon = 0.0;
    double epsilon_prime = 0.0;
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    std::size_t r = 0;  // largest Markov boundary size
    double big_c = 1.0;
    std::uint64_t seed = 0;
};

// Plain inner-product-preserving dimension: k = ceil(20 ln(2n) / eps^2).
inline std::size_t jl_dimension(std::size_t n, double eps) {
    if (n < 1 || eps <= 0.0) throw invalid_input_error("jl_dimension: need n >= 1 and eps > 0");
    return static_cast<std::size_t>(
        std::ceil(20.0 * std::log(2.0 * static_cast<double>(n)) / (eps * eps)));
}

// eps' = min{1/2, eps/C, lambda_min/(2 r^2)} with
// C = (r+1)^3 ((2 lambda_max + 2 (r+1)^2) / lambda_min)^r, then
// k = ceil(20 ln(2n) / eps'^2). Natural logarithm throughout. With r = 0
// the boundary terms are vacuous and the plan degenerates to plain
// inner-product preservation at min{1/2, eps}.
inline ReductionPlan reduction_plan(const Mat& vectors, double epsilon,
                                    const std::vector<std::size_t>& boundary_sizes,
                                    std::uint64_t seed = 0) {
    const std::size_t n = static_cast<std::size_t>(vectors.cols());
    if (epsilon <= 0.0 || epsilon >= 1.0)
        throw invalid_input_error("reduction_plan: epsilon must lie in (0,1)");
    if (boundary_sizes.size() != n)
        throw invalid_input_error("reduction_plan: need one boundary size per vector");
    for (Eigen::Index i = 0; i < vectors.cols(); ++i)
        if (std::abs(vectors.col(i).norm() - 1.0) > 1e-9)
            throw invalid_input_error("reduction_plan: vectors must be unit-normalized");

    const Mat gram = vectors.transpose() * vectors;
    Eigen::SelfAdjointEigenSolver<Mat> es(gram);
    const double lmin = es.eigenvalues()(0);
    const double lmax = es.eigenvalues()(es.eigenvalues().size() - 1);
    if (lmin <= 0.0)
        throw invalid_input_error("reduction_plan: gram matrix is not positive definite "
                                  "(eigenvalue " +
                                  std::to_string(lmin) + ")");

    ReductionPlan plan;
    plan.n = n;
    plan.epsilon = epsilon;
    plan.lambda_min = lmin;
    plan.lambda_max = lmax;
    plan.r = 0;
    for (std::size_t s : boundary_sizes) plan.r = std::max(plan.r, s);
    plan.seed = seed;

    const double rp1 = static_cast<double>(plan.r) + 1.0;
    plan.big_c = rp1 * rp1 * rp1 *
                 std::pow((2.0 * lmax + 2.0 * rp1 * rp1) / lmin, static_cast<double>(plan.r));
    plan.epsilon_prime = std::min(0.5, epsilon / plan.big_c);
    if (plan.r > 0) {
        const double rr = static_cast<double>(plan.r);
        plan.epsilon_prime = std::min(plan.epsilon_prime, lmin / (2.0 * rr * rr));
    }
    plan.k = jl_dimension(n, plan.epsilon_prime);
    return plan;
}

inline ReductionPlan reduction_plan(const IpeMap& map, double epsilon,
                                    const std::vector<std::size_t>& boundary_sizes,
                                    std::uint64_t seed = 0) {
    return reduction_plan(Mat(map.rows.transpose()), epsilon, boundary_sizes, seed);
}

// g(x) = (1/sqrt(k)) R x with R a k x d matrix of standard normals drawn
// row-major from the seeded generator. Columns of the input are the
// vectors; the same R is applied to all of them.
inline Mat jl_project(const Mat& vectors, std::size_t k, std::uint64_t seed) {
    if (k < 1) throw invalid_input_error("jl_project: k must be >= 1");
    const Eigen::Index d = vectors.rows();
    Mat r(static_cast<Eigen::Index>(k), d);
    SplitMix64 rng(seed);
    for (Eigen::Index i = 0; i < r.rows(); ++i)
        for (Eigen::Index j = 0; j < d; ++j) r(i, j) = rng.normal();
    return (r * vectors) / std::sqrt(static_cast<double>(k));
}

struct ReducedOrthViolation {
    std::size_t i = 0, j = 0;
    double value = 0.0;
};

struct ReducedOrthReport {
    double max_abs = 0.0;
    std::size_t pairs_checked = 0;
    std::vector<ReducedOrthViolation> violations;  // |value| > epsilon
};

// For each row i with boundary M_i: projects every g-row onto the
// complement of span{g(m) : m in M_i} and reports the residual inner
// products <g(v_i)_perp, g(v_j)_perp> for j outside M_i ∪ {i} against the
// epsilon bound. Columns of `reduced` are the projected vectors.
inline ReducedOrthReport verify_reduced_orthogonality(const Mat& reduced,
                                                      const std::vector<IndexSet>& boundaries,
                                                      double epsilon, const Tolerance& tol = {}) {
    const std::size_t n = static_cast<std::size_t>(reduced.cols());
    if (boundaries.size() != n)
        throw invalid_input_error("verify_reduced_orthogonality: need one boundary per vector");

    ReducedOrthReport out;
    for (std::size_t i = 0; i < n; ++i) {
        const IndexSet& m = boundaries[i];
        for (std::size_t b : m)
            if (b >= n || b == i)
                throw invalid_input_error(
                    "verify_reduced_orthogonality: boundary index out of range");
        const Subspace s = orthonormal_basis_of_columns(reduced, m, tol);
        const Vec ri = residual(reduced.col(static_cast<Eigen::Index>(i)), s);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i || detail::set_contains(m, j)) continue;
            const Vec rj = residual(reduced.col(static_cast<Eigen::Index>(j)), s);
            const double val = ri.dot(rj);
            ++out.pairs_checked;
            out.max_abs = std::max(out.max_abs, std::abs(val));
            if (std::abs(val) > epsilon) out.violations.push_back({i, j, val});
        }
    }
    return out;
}

}  // namespace olens
