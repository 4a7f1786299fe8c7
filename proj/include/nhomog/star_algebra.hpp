#pragma once

// The *-algebra generated by a finite tuple of matrices: its span, its
// commutant, irreducibility and whether it contains the identity.

#include <deque>
#include <string>
#include <vector>

#include "nhomog/matrix_core.hpp"

namespace nhomog {

/// A k-tuple of d x d matrices (T_1, ..., T_k).
class MatTuple {
public:
    MatTuple() = default;

    explicit MatTuple(std::vector<CMatrix> gens) : gens_(std::move(gens)) {
        require(!gens_.empty(), ErrorKind::DimensionMismatch, "a matrix tuple needs at least one generator");
        const Index d = gens_.front().rows();
        require(d >= 1, ErrorKind::DimensionMismatch, "generators must be at least 1x1");
        for (const auto& g : gens_) {
            require(g.rows() == d && g.cols() == d, ErrorKind::DimensionMismatch,
                    "all generators must be square of the same size");
            require(all_finite(g), ErrorKind::DomainError, "generator has non-finite entries");
        }
    }

    Index dim() const { return gens_.empty() ? 0 : gens_.front().rows(); }
    Index size() const { return static_cast<Index>(gens_.size()); }
    const CMatrix& operator[](Index j) const { return gens_[static_cast<size_t>(j)]; }
    const std::vector<CMatrix>& gens() const { return gens_; }

    /// Generators followed by their adjoints.
    std::vector<CMatrix> letters() const {
        std::vector<CMatrix> out = gens_;
        for (const auto& g : gens_) out.push_back(g.adjoint());
        return out;
    }

    /// u.T = (u T_1 u*, ..., u T_k u*).
    MatTuple conjugated(const CMatrix& u) const {
        std::vector<CMatrix> out;
        for (const auto& g : gens_) out.push_back(u * g * u.adjoint());
        return MatTuple(std::move(out));
    }

    /// Compression iso* T iso onto the range of an isometry.
    MatTuple compressed(const CMatrix& iso) const {
        std::vector<CMatrix> out;
        for (const auto& g : gens_) out.push_back(iso.adjoint() * g * iso);
        return MatTuple(std::move(out));
    }

    double max_norm() const {
        double m = 0.0;
        for (const auto& g : gens_) m = std::max(m, g.norm());
        return m;
    }

private:
    std::vector<CMatrix> gens_;
};

inline MatTuple direct_sum(const MatTuple& a, const MatTuple& b) {
    require(a.size() == b.size(), ErrorKind::DimensionMismatch, "direct sum needs equal generator counts");
    std::vector<CMatrix> out;
    for (Index j = 0; j < a.size(); ++j) out.push_back(direct_sum({a[j], b[j]}));
    return MatTuple(std::move(out));
}

/// Orthonormal basis (trace inner product) of a subspace of rows x cols matrices.
struct SubspaceBasis {
    Index rows = 0;
    Index cols = 0;
    std::vector<CMatrix> basis;

    Index dim() const { return static_cast<Index>(basis.size()); }
    Index ambient_dim() const { return rows * cols; }

    CMatrix project(const CMatrix& x) const {
        CMatrix p = CMatrix::Zero(rows, cols);
        for (const auto& b : basis) p += b * vec(b).dot(vec(x));
        return p;
    }

    /// ||x - P x||_F.
    double distance(const CMatrix& x) const { return (x - project(x)).norm(); }

    CMatrix gram() const {
        const Index m = dim();
        CMatrix g(m, m);
        for (Index i = 0; i < m; ++i)
            for (Index j = 0; j < m; ++j)
                g(i, j) = vec(basis[static_cast<size_t>(i)]).dot(vec(basis[static_cast<size_t>(j)]));
        return g;
    }
};

namespace detail {

inline SubspaceBasis to_subspace(const SpanBuilder& sb, Index rows, Index cols) {
    SubspaceBasis out{rows, cols, {}};
    for (const auto& v : sb.basis()) out.basis.push_back(unvec(v, rows, cols));
    return out;
}

}  // namespace detail

/// Span of all words of length >= 1 in the generators and their adjoints:
/// the (non-unital) *-algebra C*(T). Grown by right multiplication with the
/// letters until a full round adds nothing.
inline SubspaceBasis word_span(const MatTuple& t, const Tolerance& tol = {}) {
    const Index d = t.dim();
    const auto letters = t.letters();
    std::vector<double> letter_norm;
    double top = 0.0;
    for (const auto& g : letters) {
        letter_norm.push_back(op_norm(g));
        top = std::max(top, letter_norm.back());
    }
    SpanBuilder sb(d * d, tol);
    std::deque<CMatrix> queue;
    for (const auto& g : letters) {
        if (sb.add(vec(g), top)) queue.push_back(unvec(sb.basis().back(), d, d));
    }
    while (!queue.empty() && sb.size() < d * d) {
        const CMatrix b = queue.front();
        queue.pop_front();
        for (size_t j = 0; j < letters.size(); ++j) {
            if (letter_norm[j] == 0.0) continue;
            if (sb.add(vec(b * letters[j]), letter_norm[j])) queue.push_back(unvec(sb.basis().back(), d, d));
        }
    }
    return detail::to_subspace(sb, d, d);
}

/// {X : X T_j = T_j X and X T_j* = T_j* X for all j}.
///
/// Any such X commutes with a generic Hermitian element H of C*(T), so X is
/// block diagonal in an eigenbasis of H. The stacked commutation system is
/// solved only for those block entries; eigenvalue clusters of H are merged
/// generously, which can only enlarge the search space.
inline SubspaceBasis commutant(const MatTuple& t, const Tolerance& tol = {}) {
    const Index d = t.dim();
    const auto letters = t.letters();

    std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
    std::uniform_real_distribution<double> coef(0.5, 1.5);
    CMatrix h = CMatrix::Zero(d, d);
    for (const auto& g : t.gens()) {
        h += coef(rng) * (g + g.adjoint());
        h += coef(rng) * (kI * (g - g.adjoint()));
    }
    h = hermitian_part(h);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
    require(es.info() == Eigen::Success, ErrorKind::NumericalFailure, "commutant: eigensolver failed");
    const RVector lam = es.eigenvalues();
    const CMatrix q = es.eigenvectors();
    const double hscale = std::max(std::abs(lam(0)), std::abs(lam(d - 1)));
    const double merge = 1e-7 * hscale;

    // Unknowns: entries (a, b) with a and b in the same cluster.
    std::vector<std::pair<Index, Index>> unknowns;
    Index start = 0;
    for (Index i = 1; i <= d; ++i) {
        if (i == d || lam(i) - lam(i - 1) > merge) {
            for (Index a = start; a < i; ++a)
                for (Index b = start; b < i; ++b) unknowns.emplace_back(a, b);
            start = i;
        }
    }

    std::vector<CMatrix> rotated;
    double scale = 0.0;
    for (const auto& g : letters) {
        rotated.push_back(q.adjoint() * g * q);
        scale = std::max(scale, 2.0 * g.norm());
    }

    const Index n_unknown = static_cast<Index>(unknowns.size());
    const Index block = d * d;
    CMatrix sys = CMatrix::Zero(static_cast<Index>(rotated.size()) * block, n_unknown);
    for (Index col = 0; col < n_unknown; ++col) {
        const auto [a, b] = unknowns[static_cast<size_t>(col)];
        for (size_t l = 0; l < rotated.size(); ++l) {
            const CMatrix& bm = rotated[l];
            const Index off = static_cast<Index>(l) * block;
            // (E_ab B - B E_ab)(r, c) = [r == a] B(b, c) - [c == b] B(r, a)
            for (Index c = 0; c < d; ++c) sys(off + c * d + a, col) += bm(b, c);
            for (Index r = 0; r < d; ++r) sys(off + b * d + r, col) -= bm(r, a);
        }
    }

    SubspaceBasis out{d, d, {}};
    if (scale == 0.0) {
        for (Index a = 0; a < d; ++a)
            for (Index b = 0; b < d; ++b) {
                CMatrix e = CMatrix::Zero(d, d);
                e(a, b) = 1.0;
                out.basis.push_back(e);
            }
        return out;
    }
    const CMatrix null = nullspace(sys, scale, tol, "commutant");
    for (Index c = 0; c < null.cols(); ++c) {
        CMatrix y = CMatrix::Zero(d, d);
        for (Index i = 0; i < n_unknown; ++i) {
            const auto [a, b] = unknowns[static_cast<size_t>(i)];
            y(a, b) = null(i, c);
        }
        out.basis.push_back(q * y * q.adjoint());
    }
    return out;
}

/// {U : U A_j = B_j U and U A_j* = B_j* U}, U of size dim(b) x dim(a).
inline SubspaceBasis intertwiners(const MatTuple& a, const MatTuple& b, const Tolerance& tol = {}) {
    require(a.size() == b.size(), ErrorKind::DimensionMismatch, "intertwiners: generator counts differ");
    const Index da = a.dim();
    const Index db = b.dim();
    const auto la = a.letters();
    const auto lb = b.letters();
    const Index block = db * da;
    CMatrix sys = CMatrix::Zero(static_cast<Index>(la.size()) * block, block);
    double scale = 0.0;
    for (size_t l = 0; l < la.size(); ++l) {
        scale = std::max({scale, la[l].norm() + lb[l].norm()});
        const Index off = static_cast<Index>(l) * block;
        // vec(U A) = (A^T (x) I) vec(U), vec(B U) = (I (x) B) vec(U)
        for (Index p = 0; p < da; ++p)
            for (Index q = 0; q < da; ++q) {
                const Complex aqp = la[l](q, p);
                if (aqp == Complex{}) continue;
                for (Index r = 0; r < db; ++r) sys(off + p * db + r, q * db + r) += aqp;
            }
        for (Index p = 0; p < da; ++p)
            for (Index r = 0; r < db; ++r)
                for (Index s = 0; s < db; ++s) sys(off + p * db + r, p * db + s) -= lb[l](r, s);
    }
    SubspaceBasis out{db, da, {}};
    if (scale == 0.0) {
        for (Index c = 0; c < block; ++c) {
            CVector e = CVector::Zero(block);
            e(c) = 1.0;
            out.basis.push_back(unvec(e, db, da));
        }
        return out;
    }
    const CMatrix null = nullspace(sys, scale, tol, "intertwiners");
    for (Index c = 0; c < null.cols(); ++c) out.basis.push_back(unvec(null.col(c), db, da));
    return out;
}

/// Nonzero and with scalar commutant. Cross-checked against Burnside's
/// theorem (the word span must then be all of M_d); a disagreement between
/// the two routes is a numerical failure.
inline bool is_irreducible(const MatTuple& t, const Tolerance& tol = {}) {
    const Index d = t.dim();
    const bool nonzero = t.max_norm() > 0.0;
    const bool scalar_commutant = nonzero && commutant(t, tol).dim() == 1;
    const bool full_span = word_span(t, tol).dim() == d * d;
    require(scalar_commutant == full_span, ErrorKind::NumericalFailure,
            "commutant and word-span irreducibility tests disagree");
    return scalar_commutant;
}

/// Whether I_d lies in C*(T).
inline bool contains_identity(const MatTuple& t, const Tolerance& tol = {}) {
    const Index d = t.dim();
    const SubspaceBasis span = word_span(t, tol);
    return span.distance(identity(d)) <= tol.eq_tol * std::sqrt(static_cast<double>(d));
}

}  // namespace nhomog
