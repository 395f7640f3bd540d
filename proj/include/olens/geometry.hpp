#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "olens/errors.hpp"

namespace olens {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Numerical thresholds standing in for the exact zeros of the underlying
// theory.
//   rank_tol  - singular-value cutoff for span construction; 0 means
//               adaptive: max(m,n) * eps * sigma_max.
//   ortho_tol - |inner product| at or below this counts as orthogonal.
//   zero_tol  - residual norms at or below this count as the zero vector.
struct Tolerance {
    double rank_tol = 0.0;
    double ortho_tol = 1e-8;
    double zero_tol = 1e-10;
};

struct CosineResult {
    double value = 0.0;
    // Set when either argument (or residual) had norm <= zero_tol; the
    // value is then 0 and carries no directional information.
    bool degenerate = false;
};

// A linear subspace of R^d held as an orthonormal basis (columns of
// `basis`). rank == basis.cols(); the empty span has rank 0.
class Subspace {
public:
    Subspace() : basis_(0, 0), ambient_dim_(0) {}
    Subspace(Mat orthonormal_columns, Eigen::Index ambient_dim)
        : basis_(std::move(orthonormal_columns)), ambient_dim_(ambient_dim) {
        if (basis_.size() > 0 && basis_.rows() != ambient_dim_)
            throw invalid_input_error("Subspace: basis rows do not match ambient dimension");
    }

    const Mat& basis() const { return basis_; }
    Eigen::Index ambient_dim() const { return ambient_dim_; }
    Eigen::Index rank() const { return basis_.cols(); }

private:
    Mat basis_;
    Eigen::Index ambient_dim_;
};

// Orthonormal span of a (possibly empty, possibly rank-deficient) list of
// vectors. SVD-based so the result is deterministic for a fixed input
// order. Singular values <= rank_tol are treated as zero.
inline Subspace orthonormal_basis(const std::vector<Vec>& vectors, const Tolerance& tol = {}) {
    if (vectors.empty()) return Subspace(Mat(0, 0), 0);
    const Eigen::Index d = vectors.front().size();
    for (const Vec& v : vectors)
        if (v.size() != d)
            throw invalid_input_error("orthonormal_basis: vectors have mixed dimensions");

    Mat a(d, static_cast<Eigen::Index>(vectors.size()));
    for (Eigen::Index j = 0; j < a.cols(); ++j) a.col(j) = vectors[static_cast<std::size_t>(j)];

    Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    double cutoff = tol.rank_tol;
    if (cutoff <= 0.0 && sv.size() > 0) {
        cutoff = static_cast<double>(std::max(a.rows(), a.cols())) *
                 std::numeric_limits<double>::epsilon() * sv(0);
    }
    Eigen::Index rank = 0;
    while (rank < sv.size() && sv(rank) > cutoff) ++rank;
    return Subspace(svd.matrixU().leftCols(rank), d);
}

// Orthonormal span of selected columns of a d x n matrix.
inline Subspace orthonormal_basis_of_columns(const Mat& columns,
                                             const std::vector<std::size_t>& which,
                                             const Tolerance& tol = {}) {
    std::vector<Vec> vs;
    vs.reserve(which.size());
    for (std::size_t j : which) {
        if (j >= static_cast<std::size_t>(columns.cols()))
            throw invalid_input_error("orthonormal_basis_of_columns: column index out of range");
        vs.push_back(columns.col(static_cast<Eigen::Index>(j)));
    }
    if (vs.empty()) return Subspace(Mat(columns.rows(), 0), columns.rows());
    return orthonormal_basis(vs, tol);
}

inline void check_same_dim(const Vec& v, const Subspace& s, const char* where) {
    if (s.rank() == 0) return;  // empty span accepts any dimension
    if (v.size() != s.ambient_dim())
        throw invalid_input_error(std::string(where) + ": vector dimension does not match subspace");
}

// Orthogonal projection of v onto s. Projection onto the empty span is 0.
inline Vec project(const Vec& v, const Subspace& s) {
    check_same_dim(v, s, "project");
    if (s.rank() == 0) return Vec::Zero(v.size());
    return s.basis() * (s.basis().transpose() * v);
}

inline Vec residual(const Vec& v, const Subspace& s) {
    check_same_dim(v, s, "residual");
    if (s.rank() == 0) return v;
    return v - s.basis() * (s.basis().transpose() * v);
}

inline CosineResult cosine(const Vec& u, const Vec& v, const Tolerance& tol = {}) {
    if (u.size() != v.size()) throw invalid_input_error("cosine: dimension mismatch");
    const double nu = u.norm();
    const double nv = v.norm();
    if (nu <= tol.zero_tol || nv <= tol.zero_tol) return {0.0, true};
    const double c = u.dot(v) / (nu * nv);
    return {std::clamp(c, -1.0, 1.0), false};
}

// Cosine of the residuals of v and u after projecting out m.
inline CosineResult projected_cosine(const Vec& v, const Vec& u, const Subspace& m,
                                     const Tolerance& tol = {}) {
    if (v.size() != u.size()) throw invalid_input_error("projected_cosine: dimension mismatch");
    check_same_dim(v, m, "projected_cosine");
    return cosine(residual(v, m), residual(u, m), tol);
}

// Principal angles between two subspaces: arccos of the singular values of
// B1^T B2, ascending, in [0, pi/2]. Values are clamped to [0, 1] before
// arccos to absorb rounding.
inline std::vector<double> principal_angles(const Subspace& s1, const Subspace& s2) {
    if (s1.rank() == 0 || s2.rank() == 0)
        throw invalid_input_error("principal_angles: both subspaces must have rank >= 1");
    if (s1.ambient_dim() != s2.ambient_dim())
        throw invalid_input_error("principal_angles: ambient dimensions differ");
    Eigen::JacobiSVD<Mat> svd(s1.basis().transpose() * s2.basis());
    const auto& sv = svd.singularValues();  // descending
    std::vector<double> angles(static_cast<std::size_t>(sv.size()));
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        angles[static_cast<std::size_t>(i)] = std::acos(std::clamp(sv(i), 0.0, 1.0));
    std::sort(angles.begin(), angles.end());
    return angles;
}

}  // namespace olens
