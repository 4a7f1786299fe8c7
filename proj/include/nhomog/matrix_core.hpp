#pragma once

// Dense complex-matrix kernel shared by every other module: Hermitian
// eigendecomposition, spectral functions, the PSD order and rank decisions.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nhomog/error.hpp"

namespace nhomog {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr Complex kI{0.0, 1.0};

/// Numerical policy. rank_cut is a relative singular-value threshold,
/// psd_slack the eigenvalue slack of order checks, eq_tol the elementwise
/// comparison tolerance. All are scaled by the size of the operands.
struct Tolerance {
    double rank_cut = 1e-9;
    double psd_slack = 1e-8;
    double eq_tol = 1e-8;

    void validate() const {
        auto ok = [](double v) { return v > 0.0 && v < 1e-2; };
        require(ok(rank_cut) && ok(psd_slack) && ok(eq_tol), ErrorKind::DomainError,
                "tolerances must lie in (0, 1e-2)");
    }
};

// ---------------------------------------------------------------------------
// Construction and small helpers

inline bool all_finite(const CMatrix& a) {
    for (Index i = 0; i < a.size(); ++i) {
        const Complex z = a.data()[i];
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    }
    return true;
}

/// Builds a rows x cols matrix from row-major entries, rejecting NaN/Inf.
inline CMatrix make_matrix(Index rows, Index cols, const std::vector<Complex>& entries) {
    require(rows > 0 && cols > 0, ErrorKind::DimensionMismatch, "matrix dimensions must be positive");
    require(static_cast<Index>(entries.size()) == rows * cols, ErrorKind::DimensionMismatch,
            "entry count does not match rows*cols");
    CMatrix a(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) a(i, j) = entries[static_cast<size_t>(i * cols + j)];
    require(all_finite(a), ErrorKind::DomainError, "matrix has non-finite entries");
    return a;
}

inline CMatrix identity(Index n) { return CMatrix::Identity(n, n); }

inline void require_square(const CMatrix& a, const char* what) {
    require(a.rows() == a.cols(), ErrorKind::NotSquare, std::string(what) + " must be square");
}

/// Cheap upper bound on the operator norm (max absolute row sum), floored at 1.
/// Used to turn relative tolerances into absolute ones.
inline double scale_of(const CMatrix& a) {
    if (a.size() == 0) return 1.0;
    return std::max(1.0, a.cwiseAbs().rowwise().sum().maxCoeff());
}

inline double op_norm(const CMatrix& a) {
    if (a.size() == 0) return 0.0;
    Eigen::JacobiSVD<CMatrix> svd(a);
    return svd.singularValues()(0);
}

inline bool is_hermitian(const CMatrix& a, const Tolerance& tol) {
    if (a.rows() != a.cols()) return false;
    return (a - a.adjoint()).norm() <= tol.eq_tol * (1.0 + a.norm());
}

inline void require_hermitian(const CMatrix& a, const Tolerance& tol, const char* what) {
    require_square(a, what);
    require(is_hermitian(a, tol), ErrorKind::NotHermitian, std::string(what) + " is not Hermitian");
}

inline CMatrix hermitian_part(const CMatrix& a) { return 0.5 * (a + a.adjoint()); }

inline bool is_normal(const CMatrix& a, const Tolerance& tol) {
    if (a.rows() != a.cols()) return false;
    const double nrm = a.norm();
    return (a * a.adjoint() - a.adjoint() * a).norm() <= tol.eq_tol * (1.0 + nrm * nrm);
}

inline bool is_unitary(const CMatrix& u, double tol) {
    if (u.rows() != u.cols()) return false;
    return (u.adjoint() * u - identity(u.rows())).norm() <= tol;
}

/// Block-diagonal direct sum.
inline CMatrix direct_sum(const std::vector<CMatrix>& blocks) {
    Index n = 0;
    for (const auto& b : blocks) n += b.rows();
    CMatrix out = CMatrix::Zero(n, n);
    Index off = 0;
    for (const auto& b : blocks) {
        out.block(off, off, b.rows(), b.cols()) = b;
        off += b.rows();
    }
    return out;
}

/// Phase convention: the first entry of column 0 whose modulus exceeds
/// `floor` is made real positive.
inline CMatrix phase_normalize(const CMatrix& u, double floor = 1e-8) {
    for (Index i = 0; i < u.rows(); ++i) {
        const Complex z = u(i, 0);
        if (std::abs(z) > floor) return u * (std::conj(z) / std::abs(z));
    }
    return u;
}

// ---------------------------------------------------------------------------
// Hermitian spectral calculus

struct HermEig {
    RVector values;  // ascending
    CMatrix vectors;  // columns are eigenvectors
};

inline HermEig herm_eig(const CMatrix& a, const Tolerance& tol = {}) {
    require_hermitian(a, tol, "herm_eig input");
    const CMatrix h = hermitian_part(a);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
    require(es.info() == Eigen::Success, ErrorKind::NumericalFailure, "Hermitian eigensolver did not converge");
    return {es.eigenvalues(), es.eigenvectors()};
}

/// u diag(f(lambda_i)) u*. f must return finite values on the spectrum.
template <typename F>
CMatrix herm_fun(const CMatrix& a, F&& f, const Tolerance& tol = {}) {
    const HermEig eig = herm_eig(a, tol);
    RVector fv(eig.values.size());
    for (Index i = 0; i < fv.size(); ++i) {
        fv(i) = f(eig.values(i));
        require(std::isfinite(fv(i)), ErrorKind::DomainError,
                "function undefined at eigenvalue " + std::to_string(eig.values(i)));
    }
    return eig.vectors * fv.asDiagonal() * eig.vectors.adjoint();
}

/// a^s for positive semidefinite a. Eigenvalues in [-psd_slack*scale, 0) are
/// clamped to zero; anything more negative is a domain error.
inline CMatrix herm_power(const CMatrix& a, double s, const Tolerance& tol = {}) {
    const double slack = tol.psd_slack * scale_of(a);
    return herm_fun(
        a,
        [&](double x) {
            if (x < -slack) return std::numeric_limits<double>::quiet_NaN();
            return x <= 0.0 ? (s == 0.0 ? 1.0 : 0.0) : std::pow(x, s);
        },
        tol);
}

inline CMatrix herm_sqrt(const CMatrix& a, const Tolerance& tol = {}) { return herm_power(a, 0.5, tol); }

/// |u| = sqrt(u* u).
inline CMatrix abs_value(const CMatrix& u, const Tolerance& tol = {}) {
    const CMatrix g = hermitian_part(u.adjoint() * u);
    return herm_sqrt(g, tol);
}

inline double max_spec(const CMatrix& a, const Tolerance& tol = {}) {
    return herm_eig(a, tol).values.maxCoeff();
}

inline double min_spec(const CMatrix& a, const Tolerance& tol = {}) {
    return herm_eig(a, tol).values.minCoeff();
}

enum class PsdOrder { LEQ, LT, INCOMPARABLE };

inline const char* to_string(PsdOrder o) {
    switch (o) {
        case PsdOrder::LEQ: return "LEQ";
        case PsdOrder::LT: return "LT";
        case PsdOrder::INCOMPARABLE: return "INCOMPARABLE";
    }
    return "?";
}

/// Compares a and b in the Loewner order. LT means b - a is positive
/// definite beyond the slack, LEQ means it is nonnegative within the slack.
inline PsdOrder psd_order(const CMatrix& a, const CMatrix& b, const Tolerance& tol = {}) {
    require(a.rows() == b.rows() && a.cols() == b.cols(), ErrorKind::DimensionMismatch,
            "psd_order operands differ in shape");
    require_hermitian(a, tol, "psd_order lhs");
    require_hermitian(b, tol, "psd_order rhs");
    const double slack = tol.psd_slack * std::max(scale_of(a), scale_of(b));
    const double m = min_spec(hermitian_part(b - a), tol);
    if (m > slack) return PsdOrder::LT;
    if (m >= -slack) return PsdOrder::LEQ;
    return PsdOrder::INCOMPARABLE;
}

inline bool psd_leq(const CMatrix& a, const CMatrix& b, const Tolerance& tol = {}) {
    return psd_order(a, b, tol) != PsdOrder::INCOMPARABLE;
}

inline bool is_psd(const CMatrix& a, const Tolerance& tol = {}) {
    return psd_leq(CMatrix::Zero(a.rows(), a.cols()), a, tol);
}

// ---------------------------------------------------------------------------
// Normal matrices

inline Eigen::VectorXcd normal_eigenvalues(const CMatrix& a) {
    require_square(a, "normal_eigenvalues input");
    Eigen::ComplexEigenSolver<CMatrix> es(a, false);
    require(es.info() == Eigen::Success, ErrorKind::NumericalFailure, "complex eigensolver did not converge");
    return es.eigenvalues();
}

enum class SeparationReason { Disjoint, Overlap, NonNormal, ShapeMismatch };

inline const char* to_string(SeparationReason r) {
    switch (r) {
        case SeparationReason::Disjoint: return "Disjoint";
        case SeparationReason::Overlap: return "Overlap";
        case SeparationReason::NonNormal: return "NonNormal";
        case SeparationReason::ShapeMismatch: return "ShapeMismatch";
    }
    return "?";
}

struct SpectralSeparation {
    bool disjoint = false;
    SeparationReason reason = SeparationReason::Overlap;
    double gap = 0.0;  // min distance between the spectra when both are normal
};

/// True iff a and b are both normal and their spectra are further apart than
/// 2*psd_slack (relative to the operands' scale).
inline SpectralSeparation normal_spectra_disjoint(const CMatrix& a, const CMatrix& b, const Tolerance& tol = {}) {
    if (a.rows() != a.cols() || b.rows() != b.cols()) return {false, SeparationReason::ShapeMismatch, 0.0};
    if (!is_normal(a, tol) || !is_normal(b, tol)) return {false, SeparationReason::NonNormal, 0.0};
    const Eigen::VectorXcd sa = normal_eigenvalues(a);
    const Eigen::VectorXcd sb = normal_eigenvalues(b);
    double gap = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < sa.size(); ++i)
        for (Index j = 0; j < sb.size(); ++j) gap = std::min(gap, std::abs(sa(i) - sb(j)));
    const double thr = 2.0 * tol.psd_slack * std::max(scale_of(a), scale_of(b));
    if (gap > thr) return {true, SeparationReason::Disjoint, gap};
    return {false, SeparationReason::Overlap, gap};
}

// ---------------------------------------------------------------------------
// Rank decisions

/// Column-major vectorisation; the standard inner product of vec(X), vec(Y)
/// equals the trace pairing tr(Y* X).
inline CVector vec(const CMatrix& a) { return Eigen::Map<const CVector>(a.data(), a.size()); }

inline CMatrix unvec(const CVector& v, Index rows, Index cols) {
    return Eigen::Map<const CMatrix>(v.data(), rows, cols);
}

/// Orthonormal basis (as columns) of the nullspace of m. Singular values at
/// or below rank_cut * scale count as zero; the smallest kept value must
/// exceed the largest dropped one by a factor of 10, otherwise the rank is
/// ambiguous and NumericalFailure is raised.
inline CMatrix nullspace(const CMatrix& m, double scale, const Tolerance& tol, const std::string& what = "nullspace") {
    const Index cols = m.cols();
    if (cols == 0) return CMatrix(0, 0);
    CMatrix work = m;
    if (work.rows() < cols) {
        work.conservativeResize(cols, cols);
        work.bottomRows(cols - m.rows()).setZero();
    }
    // JacobiSVD throughout: BDCSVD in Eigen 3.4 can return a wrong V when
    // singular values are heavily repeated, which these systems often are.
    Eigen::JacobiSVD<CMatrix> svd(work, Eigen::ComputeThinV);
    const RVector sv = svd.singularValues();
    const CMatrix v = svd.matrixV();
    const double cut = tol.rank_cut * scale;
    Index rank = 0;
    while (rank < sv.size() && sv(rank) > cut) ++rank;
    if (rank > 0 && rank < sv.size() && sv(rank) > 0.0) {
        require(sv(rank - 1) >= 10.0 * sv(rank), ErrorKind::NumericalFailure,
                what + ": ambiguous rank (singular value gap below 10)");
    }
    return v.rightCols(cols - rank);
}

/// Incrementally grown orthonormal basis of a subspace of C^dim. A candidate
/// is accepted when its residual after projection exceeds 10*rank_cut*scale,
/// rejected when at most rank_cut*scale, and anything in between is an
/// ambiguous rank decision.
class SpanBuilder {
public:
    SpanBuilder(Index dim, Tolerance tol) : dim_(dim), tol_(tol) {}

    Index ambient_dim() const { return dim_; }
    Index size() const { return static_cast<Index>(basis_.size()); }
    const std::vector<CVector>& basis() const { return basis_; }

    CVector residual(const CVector& v) const {
        CVector r = v;
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& b : basis_) r -= b * b.dot(r);
        return r;
    }

    /// Returns true if v extended the span. `scale` is the size against which
    /// the residual is judged (defaults to ||v||).
    bool add(const CVector& v, double scale = -1.0) {
        require(v.size() == dim_, ErrorKind::DimensionMismatch, "SpanBuilder: vector length mismatch");
        if (static_cast<Index>(basis_.size()) >= dim_) return false;
        if (scale < 0.0) scale = v.norm();
        if (scale <= 0.0) return false;
        CVector r = residual(v);
        const double rel = r.norm() / scale;
        if (rel <= tol_.rank_cut) return false;
        require(rel > 10.0 * tol_.rank_cut, ErrorKind::NumericalFailure,
                "ambiguous rank decision while growing a span (residual " + std::to_string(rel) + ")");
        r /= r.norm();
        basis_.push_back(std::move(r));
        return true;
    }

    /// Distance of v to the span relative to ||v|| (0 for the zero vector).
    double relative_residual(const CVector& v) const {
        const double n = v.norm();
        if (n == 0.0) return 0.0;
        return residual(v).norm() / n;
    }

    CMatrix as_columns() const {
        CMatrix m(dim_, static_cast<Index>(basis_.size()));
        for (size_t i = 0; i < basis_.size(); ++i) m.col(static_cast<Index>(i)) = basis_[i];
        return m;
    }

private:
    Index dim_;
    Tolerance tol_;
    std::vector<CVector> basis_;
};

// ---------------------------------------------------------------------------
// Seeded random matrices (splitters, property tests)

inline CMatrix gaussian_matrix(Index rows, Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> nd(0.0, 1.0);
    CMatrix a(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) {
            const double re = nd(rng);
            const double im = nd(rng);
            a(i, j) = Complex(re, im);
        }
    return a;
}

inline CMatrix random_hermitian(Index n, std::mt19937_64& rng) {
    const CMatrix g = gaussian_matrix(n, n, rng);
    return 0.5 * (g + g.adjoint());
}

}  // namespace nhomog
