#pragma once

// Stone-Weierstrass machinery for matrix-valued functions on a finite point
// set X. Uniform closure of a finite-dimensional span is the span itself, so
// every density question becomes linear algebra; the constructive pipeline
// nevertheless rebuilds approximants from lattice joins, power means and
// interpolating polynomials.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "nhomog/calculus.hpp"
#include "nhomog/matrix_core.hpp"
#include "nhomog/star_algebra.hpp"

namespace nhomog {

/// A function X -> M_n, one matrix per point.
using Fn = std::vector<CMatrix>;

namespace fn {

inline Fn zero(Index points, Index n) { return Fn(static_cast<size_t>(points), CMatrix::Zero(n, n)); }
inline Fn unit(Index points, Index n) { return Fn(static_cast<size_t>(points), identity(n)); }

inline Fn constant(Index points, const CMatrix& a) { return Fn(static_cast<size_t>(points), a); }

inline CVector flatten(const Fn& f) {
    const Index n = f.front().rows();
    const Index nn = n * n;
    CVector v(static_cast<Index>(f.size()) * nn);
    for (size_t x = 0; x < f.size(); ++x) v.segment(static_cast<Index>(x) * nn, nn) = vec(f[x]);
    return v;
}

inline Fn unflatten(const CVector& v, Index points, Index n) {
    Fn f;
    for (Index x = 0; x < points; ++x) f.push_back(unvec(v.segment(x * n * n, n * n), n, n));
    return f;
}

inline double sup_norm(const Fn& f) {
    double m = 0.0;
    for (const auto& a : f) m = std::max(m, op_norm(a));
    return m;
}

inline Fn adjoint(const Fn& f) {
    Fn g;
    for (const auto& a : f) g.push_back(a.adjoint());
    return g;
}

inline Fn hermitian_part(const Fn& f) {
    Fn g;
    for (const auto& a : f) g.push_back(nhomog::hermitian_part(a));
    return g;
}

inline Fn product(const Fn& f, const Fn& g) {
    Fn h;
    for (size_t x = 0; x < f.size(); ++x) h.push_back(f[x] * g[x]);
    return h;
}

inline Fn add(const Fn& f, const Fn& g, Complex c = 1.0) {
    Fn h;
    for (size_t x = 0; x < f.size(); ++x) h.push_back(f[x] + c * g[x]);
    return h;
}

inline Fn scale(const Fn& f, Complex c) {
    Fn h;
    for (const auto& a : f) h.push_back(c * a);
    return h;
}

inline double distance_sup(const Fn& f, const Fn& g) {
    double m = 0.0;
    for (size_t x = 0; x < f.size(); ++x) m = std::max(m, op_norm(f[x] - g[x]));
    return m;
}

inline bool is_hermitian(const Fn& f, const Tolerance& tol) {
    for (const auto& a : f)
        if (!nhomog::is_hermitian(a, tol)) return false;
    return true;
}

}  // namespace fn

/// A *-subalgebra of functions X -> M_n, stored as an orthonormal basis for
/// the pairing sum_x tr(g(x)* f(x)).
struct FnAlgebra {
    Index points = 0;
    Index n = 1;
    std::vector<Fn> basis;

    Index dim() const { return static_cast<Index>(basis.size()); }
    Index ambient_dim() const { return points * n * n; }

    /// Basis as columns of flattened functions.
    CMatrix columns() const {
        CMatrix m(ambient_dim(), dim());
        for (Index b = 0; b < dim(); ++b) m.col(b) = fn::flatten(basis[static_cast<size_t>(b)]);
        return m;
    }

    Fn project(const Fn& f) const {
        const CVector v = fn::flatten(f);
        CVector p = CVector::Zero(v.size());
        for (const auto& b : basis) {
            const CVector bv = fn::flatten(b);
            p += bv * bv.dot(v);
        }
        return fn::unflatten(p, points, n);
    }

    /// Frobenius distance of f to the span.
    double distance(const Fn& f) const {
        return (fn::flatten(f) - fn::flatten(project(f))).norm();
    }

    void check(const Fn& f) const {
        require(static_cast<Index>(f.size()) == points, ErrorKind::DimensionMismatch, "function has wrong point count");
        for (const auto& a : f)
            require(a.rows() == n && a.cols() == n, ErrorKind::DimensionMismatch, "function values must be n x n");
    }
};

/// Smallest subspace containing gens and their adjoints and closed under
/// pointwise products. Grown by right multiplication as in word_span.
inline FnAlgebra closure_star_subalgebra(Index points, Index n, const std::vector<Fn>& gens, const Tolerance& tol = {}) {
    require(points >= 1 && n >= 1, ErrorKind::DomainError, "need at least one point and n >= 1");
    FnAlgebra e{points, n, {}};
    std::vector<Fn> letters;
    for (const auto& g : gens) {
        e.check(g);
        for (const auto& a : g) require(all_finite(a), ErrorKind::DomainError, "non-finite function value");
        letters.push_back(g);
        letters.push_back(fn::adjoint(g));
    }
    std::vector<double> sup;
    double top = 0.0;
    for (const auto& l : letters) {
        sup.push_back(fn::sup_norm(l));
        top = std::max(top, fn::flatten(l).norm());
    }
    SpanBuilder sb(e.ambient_dim(), tol);
    std::vector<Fn> queue;
    for (const auto& l : letters)
        if (sb.add(fn::flatten(l), top)) queue.push_back(fn::unflatten(sb.basis().back(), points, n));
    for (size_t head = 0; head < queue.size() && sb.size() < e.ambient_dim(); ++head) {
        const Fn b = queue[head];
        for (size_t j = 0; j < letters.size(); ++j) {
            if (sup[j] == 0.0) continue;
            if (sb.add(fn::flatten(fn::product(b, letters[j])), sup[j]))
                queue.push_back(fn::unflatten(sb.basis().back(), points, n));
        }
    }
    for (const auto& v : sb.basis()) e.basis.push_back(fn::unflatten(v, points, n));
    return e;
}

// ---------------------------------------------------------------------------
// Spectral separation

struct SeparationVerdict {
    bool certified = false;  // false means "not found", not "impossible"
    Fn witness;
    double gap = 0.0;
    int tried = 0;
};

/// Searches E for f with f(x), f(y) normal and disjoint spectra: the basis,
/// the Hermitian parts of the basis, then `draws` seeded real combinations of
/// those Hermitian parts. With best = true the whole family is scanned and
/// the candidate with the largest gap relative to its sup norm is returned.
inline SeparationVerdict spectrally_separates(const FnAlgebra& e, Index x, Index y, const Tolerance& tol = {},
                                              std::uint64_t seed = 0, int draws = 200, bool best = false) {
    require(x >= 0 && x < e.points && y >= 0 && y < e.points, ErrorKind::IndexOutOfRange, "point out of range");
    require(x != y, ErrorKind::SamePoint, "spectral separation needs two distinct points");
    SeparationVerdict out;
    double best_score = -1.0;
    auto consider = [&](const Fn& f) {
        ++out.tried;
        const auto s = normal_spectra_disjoint(f[static_cast<size_t>(x)], f[static_cast<size_t>(y)], tol);
        if (!s.disjoint) return false;
        const double score = s.gap / std::max(1.0, fn::sup_norm(f));
        if (score > best_score) {
            best_score = score;
            out.certified = true;
            out.witness = f;
            out.gap = s.gap;
        }
        return !best;
    };
    std::vector<Fn> herm;
    for (const auto& b : e.basis) {
        if (consider(b)) return out;
        herm.push_back(fn::hermitian_part(b));
        herm.push_back(fn::hermitian_part(fn::scale(b, -kI)));
    }
    for (const auto& h : herm)
        if (consider(h)) return out;
    if (herm.empty()) return out;
    std::mt19937_64 rng(seed ^ (static_cast<std::uint64_t>(x) << 32) ^ static_cast<std::uint64_t>(y));
    std::normal_distribution<double> nd(0.0, 1.0);
    for (int i = 0; i < draws; ++i) {
        Fn f = fn::zero(e.points, e.n);
        for (const auto& h : herm) f = fn::add(f, h, nd(rng));
        if (consider(f)) return out;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Delta_2 and density

namespace detail {

struct RangeSplit {
    CMatrix range;       // orthonormal columns spanning the column space
    CMatrix complement;  // orthonormal columns spanning its orthogonal complement
};

/// Column space of m with the same rank rule as nullspace().
inline RangeSplit range_split(const CMatrix& m, double scale, const Tolerance& tol) {
    const Index rows = m.rows();
    if (m.cols() == 0) return {CMatrix(rows, 0), identity(rows)};
    Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeFullU);
    const RVector sv = svd.singularValues();
    const double cut = tol.rank_cut * scale;
    Index rank = 0;
    while (rank < sv.size() && sv(rank) > cut) ++rank;
    if (rank > 0 && rank < sv.size() && sv(rank) > 0.0)
        require(sv(rank - 1) >= 10.0 * sv(rank), ErrorKind::NumericalFailure, "ambiguous rank of a restriction");
    const CMatrix u = svd.matrixU();
    return {u.leftCols(rank), u.rightCols(rows - rank)};
}

/// Rows of the flattened function belonging to point x.
inline CMatrix restrict_rows(const CMatrix& cols, Index x, Index n) { return cols.middleRows(x * n * n, n * n); }

}  // namespace detail

/// At finite X: all u with (u(x), u(y)) in {(v(x), v(y)) : v in E} for every
/// pair of points. Each pair contributes the constraints "orthogonal to the
/// pair restriction of E"; Delta_2 is their common solution space.
inline FnAlgebra delta2_subspace(const FnAlgebra& e, const Tolerance& tol = {}) {
    const Index nn = e.n * e.n;
    const Index amb = e.ambient_dim();
    const CMatrix cols = e.columns();
    std::vector<CMatrix> blocks;
    Index rows = 0;
    auto add_pair = [&](Index x, Index y) {
        const Index len = x == y ? nn : 2 * nn;
        CMatrix r(len, e.dim());
        r.topRows(nn) = detail::restrict_rows(cols, x, e.n);
        if (x != y) r.bottomRows(nn) = detail::restrict_rows(cols, y, e.n);
        const auto split = detail::range_split(r, 1.0, tol);
        if (split.complement.cols() == 0) return;
        CMatrix sel = CMatrix::Zero(len, amb);
        sel.block(0, x * nn, nn, nn) = identity(nn);
        if (x != y) sel.block(nn, y * nn, nn, nn) = identity(nn);
        blocks.push_back(split.complement.adjoint() * sel);
        rows += blocks.back().rows();
    };
    if (e.points == 1) add_pair(0, 0);
    for (Index x = 0; x < e.points; ++x)
        for (Index y = x + 1; y < e.points; ++y) add_pair(x, y);
    FnAlgebra out{e.points, e.n, {}};
    if (rows == 0) {
        for (Index c = 0; c < amb; ++c) {
            CVector v = CVector::Zero(amb);
            v(c) = 1.0;
            out.basis.push_back(fn::unflatten(v, e.points, e.n));
        }
        return out;
    }
    CMatrix sys(rows, amb);
    Index off = 0;
    for (const auto& b : blocks) {
        sys.middleRows(off, b.rows()) = b;
        off += b.rows();
    }
    const CMatrix null = nullspace(sys, 1.0, tol, "delta2");
    for (Index c = 0; c < null.cols(); ++c) out.basis.push_back(fn::unflatten(null.col(c), e.points, e.n));
    return out;
}

/// Mutual containment and equal dimension of two subspaces.
inline bool same_span(const FnAlgebra& a, const FnAlgebra& b, const Tolerance& tol = {}) {
    if (a.dim() != b.dim()) return false;
    const double cut = std::max(tol.rank_cut, 1e-9) * 10.0;
    for (const auto& f : a.basis)
        if (b.distance(f) > cut) return false;
    for (const auto& f : b.basis)
        if (a.distance(f) > cut) return false;
    return true;
}

/// dim E(x), the dimension of the values at one point.
inline Index pointwise_dim(const FnAlgebra& e, Index x, const Tolerance& tol = {}) {
    if (e.dim() == 0) return 0;
    const CMatrix r = detail::restrict_rows(e.columns(), x, e.n);
    return detail::range_split(r, 1.0, tol).range.cols();
}

struct DensityReport {
    bool dense = false;
    std::vector<bool> full_at_point;
    /// One entry per pair x < y: certified separation or not found.
    std::vector<std::pair<Index, Index>> pairs;
    std::vector<bool> separated;
    bool all_separation_certified = true;
    bool criterion = false;  // separated everywhere and full everywhere
    /// criterion == dense; only meaningful when all pairs were certified
    /// or fullness already fails.
    std::optional<bool> biconditional_holds;
    Index not_found = 0;
};

inline DensityReport density_check(const FnAlgebra& e, const Tolerance& tol = {}, std::uint64_t seed = 0) {
    DensityReport r;
    r.dense = e.dim() == e.ambient_dim();
    bool full = true;
    for (Index x = 0; x < e.points; ++x) {
        r.full_at_point.push_back(pointwise_dim(e, x, tol) == e.n * e.n);
        full = full && r.full_at_point.back();
    }
    bool sep = true;
    for (Index x = 0; x < e.points; ++x)
        for (Index y = x + 1; y < e.points; ++y) {
            const auto v = spectrally_separates(e, x, y, tol, seed);
            r.pairs.emplace_back(x, y);
            r.separated.push_back(v.certified);
            if (!v.certified) {
                sep = false;
                r.all_separation_certified = false;
                ++r.not_found;
            }
        }
    r.criterion = sep && full;
    if (r.all_separation_certified || !full) r.biconditional_holds = (r.criterion == r.dense);
    return r;
}

// ---------------------------------------------------------------------------
// Unit, lattice and power-mean tools

struct UnitReport {
    bool in_closure = false;
    Fn witness;  // 1_X as an element of span(E) when in_closure
    double residual = 0.0;
};

/// 1_X lies in E iff u = sum_j f_j* f_j is positive definite at every point;
/// then 1_X = phi(u) with phi = 1 on the spectrum and phi(0) = 0.
inline UnitReport unit_in_closure(const FnAlgebra& e, const Tolerance& tol = {}) {
    UnitReport r;
    Fn u = fn::zero(e.points, e.n);
    for (const auto& b : e.basis) u = fn::add(u, fn::product(fn::adjoint(b), b));
    for (const auto& ux : u) {
        const CMatrix h = hermitian_part(ux);
        if (min_spec(h, tol) <= tol.psd_slack * scale_of(h)) return r;
    }
    const Fn one = fn::unit(e.points, e.n);
    r.witness = e.project(one);
    r.residual = (fn::flatten(r.witness) - fn::flatten(one)).norm();
    require(r.residual <= tol.eq_tol * std::sqrt(static_cast<double>(e.points * e.n)), ErrorKind::NumericalFailure,
            "u is invertible everywhere but 1_X is not in the span");
    r.in_closure = true;
    return r;
}

/// h_1 = g_1, h_k = (h_{k-1} + g_k + |h_{k-1} - g_k|) / 2, pointwise.
inline Fn lattice_join_chain(const std::vector<Fn>& g, const Tolerance& tol = {}) {
    require(!g.empty(), ErrorKind::DomainError, "lattice join of an empty family");
    for (const auto& f : g) require(fn::is_hermitian(f, tol), ErrorKind::NotHermitian, "join needs Hermitian values");
    Fn h = fn::hermitian_part(g.front());
    for (size_t k = 1; k < g.size(); ++k)
        for (size_t x = 0; x < h.size(); ++x) {
            const CMatrix gk = hermitian_part(g[k][x]);
            const CMatrix diff = hermitian_part(h[x] - gk);
            const CMatrix absd = herm_fun(diff, [](double v) { return std::abs(v); }, tol);
            h[x] = hermitian_part(0.5 * (h[x] + gk + absd));
        }
    for (const auto& f : g)
        for (size_t x = 0; x < h.size(); ++x)
            require(psd_leq(hermitian_part(f[x]), h[x], tol), ErrorKind::NumericalFailure,
                    "join does not dominate its inputs");
    return h;
}

/// Smallest N >= 2 with k^(1/N) <= 1 + eps / r.
inline long power_mean_exponent(double eps, double r, Index k) {
    require(eps > 0.0 && r >= 0.0 && k >= 1, ErrorKind::DomainError, "power_mean_exponent needs eps > 0, r >= 0, k >= 1");
    if (r == 0.0 || k == 1) return 2;
    const double bound = 1.0 + eps / r;
    const double guess = std::log(static_cast<double>(k)) / std::log1p(eps / r);
    require(guess < 1e9, ErrorKind::DomainError, "power-mean exponent too large");
    long n = std::max<long>(2, static_cast<long>(guess) - 2);
    while (n > 2 && std::pow(static_cast<double>(k), 1.0 / static_cast<double>(n - 1)) <= bound) --n;
    while (std::pow(static_cast<double>(k), 1.0 / static_cast<double>(n)) > bound) ++n;
    return n;
}

/// (sum_j a_j^N)^(1/N). A commuting family is diagonalized jointly and the
/// mean is taken per eigenvalue after dividing by the largest term, so small
/// eigenvalues are not swamped by rounding in the sum. Other families fall
/// back to a global normalization by the largest eigenvalue.
inline CMatrix power_mean(const std::vector<CMatrix>& a, long big_n, const Tolerance& tol = {}) {
    require(!a.empty(), ErrorKind::DomainError, "power mean of an empty family");
    const Index d = a.front().rows();
    const double nd = static_cast<double>(big_n);
    CMatrix mix = CMatrix::Zero(d, d);
    double top = 0.0;
    for (size_t j = 0; j < a.size(); ++j) {
        mix += (1.0 + std::fmod(0.6180339887498949 * static_cast<double>(j + 1), 1.0)) * hermitian_part(a[j]);
        top = std::max(top, scale_of(a[j]));
    }
    const CMatrix v = herm_eig(mix, tol).vectors;
    std::vector<RVector> diag;
    bool joint = true;
    for (const auto& x : a) {
        const CMatrix t = v.adjoint() * hermitian_part(x) * v;
        diag.push_back(t.diagonal().real());
        if ((t - CMatrix(t.diagonal().asDiagonal())).norm() > tol.eq_tol * (1.0 + top)) joint = false;
    }
    if (joint) {
        const double slack = tol.psd_slack * top;
        RVector out = RVector::Zero(d);
        for (Index i = 0; i < d; ++i) {
            double m = 0.0;
            for (const auto& dv : diag) {
                require(dv(i) >= -slack, ErrorKind::DomainError, "power mean needs positive semidefinite terms");
                m = std::max(m, dv(i));
            }
            if (m <= 0.0) continue;
            double s = 0.0;
            for (const auto& dv : diag) s += std::pow(std::max(dv(i), 0.0) / m, nd);
            out(i) = m * std::pow(s, 1.0 / nd);
        }
        return v * out.cast<Complex>().asDiagonal() * v.adjoint();
    }
    double m = 0.0;
    for (const auto& x : a) m = std::max(m, max_spec(hermitian_part(x), tol));
    if (m <= 0.0) return CMatrix::Zero(d, d);
    CMatrix s = CMatrix::Zero(d, d);
    for (const auto& x : a) s += herm_power(hermitian_part(x) / m, nd, tol);
    return m * herm_power(hermitian_part(s), 1.0 / nd, tol);
}

struct PowerMeanResult {
    long n = 2;
    CMatrix env;
};

inline PowerMeanResult power_mean_envelope(const std::vector<CMatrix>& a, const CMatrix& b, double eps,
                                           const Tolerance& tol = {}) {
    require(!a.empty(), ErrorKind::PreconditionFailed, "need at least one a_j");
    require(eps > 0.0, ErrorKind::DomainError, "eps must be positive");
    const Index d = b.rows();
    const CMatrix zero = CMatrix::Zero(d, d);
    for (size_t j = 0; j < a.size(); ++j) {
        const std::string tag = "a_" + std::to_string(j + 1);
        require(a[j].rows() == d && a[j].cols() == d, ErrorKind::DimensionMismatch, tag + " has the wrong shape");
        require(psd_leq(zero, a[j], tol), ErrorKind::PreconditionFailed, "0 <= " + tag + " fails");
        require(psd_leq(a[j], b, tol), ErrorKind::PreconditionFailed, tag + " <= b fails");
        require((b * a[j] - a[j] * b).norm() <= tol.eq_tol * scale_of(a[j]) * scale_of(b),
                ErrorKind::PreconditionFailed, "b does not commute with " + tag);
    }
    const double r = op_norm(b);
    PowerMeanResult out;
    out.n = power_mean_exponent(eps, r, static_cast<Index>(a.size()));
    out.env = power_mean(a, out.n, tol);
    for (const auto& x : a)
        require(psd_leq(x, out.env, tol), ErrorKind::NumericalFailure, "envelope does not dominate a_s");
    require(psd_leq(out.env, b + eps * identity(d), tol), ErrorKind::NumericalFailure, "envelope exceeds b + eps");
    return out;
}

// ---------------------------------------------------------------------------
// Interpolation and Loewner-Heinz

/// Polynomial p in one variable with p = alpha on sigma(a) and p = beta on
/// sigma(b) (Lagrange on the merged eigenvalue nodes, expanded in monomials).
inline StarPolynomial two_point_flatten(const CMatrix& a, const CMatrix& b, double alpha, double beta,
                                        const Tolerance& tol = {}) {
    const auto sep = normal_spectra_disjoint(a, b, tol);
    require(sep.disjoint, ErrorKind::SpectraNotDisjoint,
            std::string("two_point_flatten: ") + to_string(sep.reason));
    StarPolynomial p(1, true);
    if (alpha == 0.0 && beta == 0.0) return p;
    if (alpha == beta) {
        p.add_term(alpha, {});
        return p;
    }
    const double merge = tol.psd_slack * std::max(scale_of(a), scale_of(b));
    std::vector<Complex> nodes;
    std::vector<double> vals;
    auto add_nodes = [&](const CMatrix& m, double v) {
        const Eigen::VectorXcd ev = normal_eigenvalues(m);
        for (Index i = 0; i < ev.size(); ++i) {
            bool dup = false;
            for (const auto& z : nodes) dup = dup || std::abs(z - ev(i)) <= merge;
            if (!dup) {
                nodes.push_back(ev(i));
                vals.push_back(v);
            }
        }
    };
    add_nodes(a, alpha);
    add_nodes(b, beta);
    const size_t m = nodes.size();
    std::vector<Complex> coef(m, 0.0);
    for (size_t i = 0; i < m; ++i) {
        // basis polynomial prod_{j != i} (z - z_j) / (z_i - z_j), built up in monomials
        std::vector<Complex> li{1.0};
        Complex denom = 1.0;
        for (size_t j = 0; j < m; ++j) {
            if (j == i) continue;
            std::vector<Complex> next(li.size() + 1, 0.0);
            for (size_t q = 0; q < li.size(); ++q) {
                next[q + 1] += li[q];
                next[q] -= nodes[j] * li[q];
            }
            li = std::move(next);
            denom *= nodes[i] - nodes[j];
        }
        for (size_t q = 0; q < li.size(); ++q) coef[q] += vals[i] * li[q] / denom;
    }
    for (size_t q = 0; q < m; ++q) {
        if (coef[q] == Complex{}) continue;
        p.add_term(coef[q], Word(q, Letter{0, false}));
    }
    const double ea = (eval_star_polynomial(p, MatTuple({a})) - alpha * identity(a.rows())).norm();
    const double eb = (eval_star_polynomial(p, MatTuple({b})) - beta * identity(b.rows())).norm();
    require(ea <= 1e-8 && eb <= 1e-8, ErrorKind::NumericalFailure,
            "interpolating polynomial is too ill-conditioned (residuals " + std::to_string(ea) + ", " +
                std::to_string(eb) + ")");
    return p;
}

struct LoewnerHeinzReport {
    std::vector<double> s;
    std::vector<double> min_eig;
};

/// Reports min sigma(b^s - a^s) for each s; a negative value beyond the
/// slack would contradict operator monotonicity and is treated as a bug.
inline LoewnerHeinzReport loewner_heinz_check(const CMatrix& a, const CMatrix& b, const std::vector<double>& s_grid,
                                              const Tolerance& tol = {}) {
    require(is_psd(a, tol), ErrorKind::PreconditionFailed, "a is not positive semidefinite");
    require(is_psd(b, tol), ErrorKind::PreconditionFailed, "b is not positive semidefinite");
    require(psd_leq(a, b, tol), ErrorKind::PreconditionFailed, "a <= b fails");
    LoewnerHeinzReport r;
    const double slack = tol.psd_slack * std::max(scale_of(a), scale_of(b));
    for (double s : s_grid) {
        require(s > 0.0 && s < 1.0, ErrorKind::DomainError, "exponent must lie in (0, 1)");
        const double m = min_spec(hermitian_part(herm_power(b, s, tol) - herm_power(a, s, tol)), tol);
        require(m >= -slack, ErrorKind::NumericalFailure, "b^s - a^s has eigenvalue " + std::to_string(m));
        r.s.push_back(s);
        r.min_eig.push_back(m);
    }
    return r;
}

// ---------------------------------------------------------------------------
// Constructive approximation

struct ApproxReport {
    Fn g;                      // constructive approximant, in span(E)
    double error = 0.0;        // sup_x ||g(x) - f(x)||
    double span_residual = 0.0;  // distance of the raw construction to span(E)
    Fn projection;             // orthogonal projection of f onto span(E)
    double projection_error = 0.0;
    Index cover_size = 0;      // number of envelope pairs (p_j, q_j)
    Index class_count = 0;     // classes of the M-equality relation
    long max_exponent = 0;     // largest power-mean exponent used
};

namespace detail {

/// Everything the lemma chain needs about E, computed once.
struct SwContext {
    const FnAlgebra& e;
    Tolerance tol;
    std::uint64_t seed;
    CMatrix cols;
    Fn one;
    std::vector<int> cls;                                // class label per point
    std::vector<std::vector<std::optional<Fn>>> witness;  // separating functions per pair

    Index points() const { return e.points; }

    /// g in E, Hermitian, with g(x) = fx and g(y) = fy (least-squares solve).
    Fn pair_interpolant(Index x, Index y, const CMatrix& fx, const CMatrix& fy) const {
        const Index nn = e.n * e.n;
        const Index len = x == y ? nn : 2 * nn;
        CMatrix r(len, e.dim());
        CVector rhs(len);
        r.topRows(nn) = restrict_rows(cols, x, e.n);
        rhs.head(nn) = vec(fx);
        if (x != y) {
            r.bottomRows(nn) = restrict_rows(cols, y, e.n);
            rhs.tail(nn) = vec(fy);
        }
        const CVector c = r.completeOrthogonalDecomposition().solve(rhs);
        const double res = (r * c - rhs).norm();
        require(res <= 1e-7 * (1.0 + rhs.norm()), ErrorKind::PreconditionFailed,
                "no element of E matches the target at points " + std::to_string(x) + ", " + std::to_string(y));
        return fn::hermitian_part(fn::unflatten(cols * c, e.points, e.n));
    }
};

/// Upper envelope at x: h in E with h(x) = f(x) and f <= h + delta, from the
/// pair interpolants, a greedy cover of X and the lattice join.
template <typename Interp>
Fn upper_envelope(const SwContext& ctx, const Fn& f, Index x, double delta, Interp&& interp) {
    const Index m = ctx.points();
    std::vector<Fn> fy;
    std::vector<std::vector<bool>> covers;
    for (Index y = 0; y < m; ++y) {
        fy.push_back(interp(x, y));
        std::vector<bool> c(static_cast<size_t>(m));
        for (Index z = 0; z < m; ++z)
            c[static_cast<size_t>(z)] = op_norm(fy.back()[static_cast<size_t>(z)] - f[static_cast<size_t>(z)]) < delta;
        c[static_cast<size_t>(y)] = true;
        covers.push_back(std::move(c));
    }
    std::vector<bool> covered(static_cast<size_t>(m), false);
    std::vector<Fn> chosen;
    while (std::find(covered.begin(), covered.end(), false) != covered.end()) {
        Index best = -1;
        int best_gain = -1;
        for (Index y = 0; y < m; ++y) {
            int gain = 0;
            for (Index z = 0; z < m; ++z) gain += covers[static_cast<size_t>(y)][static_cast<size_t>(z)] && !covered[static_cast<size_t>(z)];
            if (gain > best_gain) {
                best_gain = gain;
                best = y;
            }
        }
        for (Index z = 0; z < m; ++z)
            if (covers[static_cast<size_t>(best)][static_cast<size_t>(z)]) covered[static_cast<size_t>(z)] = true;
        chosen.push_back(fy[static_cast<size_t>(best)]);
    }
    return lattice_join_chain(chosen, ctx.tol);
}

inline bool strictly_below(const CMatrix& a, const CMatrix& b, const Tolerance& tol) {
    return psd_order(hermitian_part(a), hermitian_part(b), tol) == PsdOrder::LT;
}

/// Scalar class function alpha (constant on classes) rebuilt inside E:
/// pair interpolants from interpolating polynomials of separating witnesses,
/// lower envelopes, a cover, and the power mean. ||result - alpha|| <= 2 dp.
inline Fn class_function(const SwContext& ctx, const std::vector<double>& alpha, double dp, long& max_exponent) {
    const Index m = ctx.points();
    const Index n = ctx.e.n;
    Fn target;
    for (Index x = 0; x < m; ++x) target.push_back(alpha[static_cast<size_t>(x)] * identity(n));
    const Fn neg = fn::scale(target, -1.0);

    // interpolant of -alpha through x and y
    auto interp = [&](Index x, Index y) -> Fn {
        const double ax = -alpha[static_cast<size_t>(x)];
        const double ay = -alpha[static_cast<size_t>(y)];
        if (ax == ay) return fn::scale(ctx.one, ax);
        const auto& w = ctx.witness[static_cast<size_t>(std::min(x, y))][static_cast<size_t>(std::max(x, y))];
        require(w.has_value(), ErrorKind::HypothesisViolated,
                "points " + std::to_string(x) + ", " + std::to_string(y) + " are neither M-equivalent nor separated");
        const StarPolynomial p =
            two_point_flatten((*w)[static_cast<size_t>(x)], (*w)[static_cast<size_t>(y)], ax, ay, ctx.tol);
        Fn out;
        for (Index z = 0; z < m; ++z) {
            CMatrix v = eval_star_polynomial(p, MatTuple({(*w)[static_cast<size_t>(z)]}));
            // the constant term stands for c * 1_X
            const Complex c0 = p.constant_term();
            v += c0 * (ctx.one[static_cast<size_t>(z)] - identity(n));
            out.push_back(v);
        }
        return fn::hermitian_part(out);
    };

    // lower envelopes f_x with f_x(x) = alpha(x), f_x <= alpha + dp
    std::vector<Fn> lower;
    std::vector<std::vector<bool>> covers;
    for (Index x = 0; x < m; ++x) {
        lower.push_back(fn::scale(upper_envelope(ctx, neg, x, dp, interp), -1.0));
        std::vector<bool> c(static_cast<size_t>(m));
        for (Index y = 0; y < m; ++y)
            c[static_cast<size_t>(y)] = strictly_below(target[static_cast<size_t>(y)] - dp * identity(n),
                                                       lower.back()[static_cast<size_t>(y)], ctx.tol);
        c[static_cast<size_t>(x)] = true;
        covers.push_back(std::move(c));
    }
    std::vector<bool> covered(static_cast<size_t>(m), false);
    std::vector<Fn> g;
    while (std::find(covered.begin(), covered.end(), false) != covered.end()) {
        Index best = -1;
        int best_gain = -1;
        for (Index x = 0; x < m; ++x) {
            int gain = 0;
            for (Index y = 0; y < m; ++y) gain += covers[static_cast<size_t>(x)][static_cast<size_t>(y)] && !covered[static_cast<size_t>(y)];
            if (gain > best_gain) {
                best_gain = gain;
                best = x;
            }
        }
        for (Index y = 0; y < m; ++y)
            if (covers[static_cast<size_t>(best)][static_cast<size_t>(y)]) covered[static_cast<size_t>(y)] = true;
        g.push_back(lower[static_cast<size_t>(best)]);
    }

    // shift everything positive and take the power mean with a common exponent
    double amax = 0.0;
    for (double a : alpha) amax = std::max(amax, std::abs(a));
    double gmax = 0.0;
    for (const auto& gj : g) gmax = std::max(gmax, fn::sup_norm(gj));
    const double c = std::max(gmax, amax + dp) + 1.0;
    const double r = amax + c + dp;
    const long big_n = power_mean_exponent(dp, r, static_cast<Index>(g.size()));
    max_exponent = std::max(max_exponent, big_n);
    Fn out;
    for (Index x = 0; x < m; ++x) {
        std::vector<CMatrix> a;
        for (const auto& gj : g) a.push_back(hermitian_part(gj[static_cast<size_t>(x)] + c * ctx.one[static_cast<size_t>(x)]));
        out.push_back(power_mean(a, big_n, ctx.tol) - c * ctx.one[static_cast<size_t>(x)]);
    }
    return out;
}

/// The Hermitian case: lower/upper envelopes per point, cover, class-based
/// partition of unity rebuilt in E, and w = sum_j alpha_j p_j.
inline Fn approximate_hermitian(const SwContext& ctx, const Fn& f, double eps, ApproxReport& rep) {
    const Index m = ctx.points();
    const Index n = ctx.e.n;
    const double delta = eps / 4.0;
    const CMatrix id = identity(n);

    auto interp_f = [&](const Fn& target) {
        return [&ctx, &target](Index x, Index y) {
            return ctx.pair_interpolant(x, y, target[static_cast<size_t>(x)], target[static_cast<size_t>(y)]);
        };
    };
    const Fn negf = fn::scale(f, -1.0);
    std::vector<Fn> lower, upper;  // u_x and v_x
    for (Index x = 0; x < m; ++x) {
        upper.push_back(upper_envelope(ctx, f, x, delta, interp_f(f)));
        lower.push_back(fn::scale(upper_envelope(ctx, negf, x, delta, interp_f(negf)), -1.0));
    }

    // G_x = { y : v_x(y) - delta < f(y) < u_x(y) + delta }, greedy cover
    std::vector<std::vector<bool>> in_g(static_cast<size_t>(m), std::vector<bool>(static_cast<size_t>(m)));
    for (Index x = 0; x < m; ++x)
        for (Index y = 0; y < m; ++y) {
            const CMatrix& fy = f[static_cast<size_t>(y)];
            in_g[static_cast<size_t>(x)][static_cast<size_t>(y)] =
                strictly_below(upper[static_cast<size_t>(x)][static_cast<size_t>(y)] - delta * id, fy, ctx.tol) &&
                strictly_below(fy, lower[static_cast<size_t>(x)][static_cast<size_t>(y)] + delta * id, ctx.tol);
        }
    std::vector<Index> centers;
    std::vector<bool> covered(static_cast<size_t>(m), false);
    while (std::find(covered.begin(), covered.end(), false) != covered.end()) {
        Index best = -1;
        int best_gain = -1;
        for (Index x = 0; x < m; ++x) {
            int gain = 0;
            for (Index y = 0; y < m; ++y) gain += in_g[static_cast<size_t>(x)][static_cast<size_t>(y)] && !covered[static_cast<size_t>(y)];
            if (gain > best_gain) {
                best_gain = gain;
                best = x;
            }
        }
        require(best_gain > 0, ErrorKind::NumericalFailure, "envelope neighbourhoods do not cover X");
        for (Index y = 0; y < m; ++y)
            if (in_g[static_cast<size_t>(best)][static_cast<size_t>(y)]) covered[static_cast<size_t>(y)] = true;
        centers.push_back(best);
    }
    const Index k = static_cast<Index>(centers.size());
    rep.cover_size = std::max(rep.cover_size, k);

    // D_j = { x : -2 delta < p_j(x) - q_j(x) < 2 delta }
    std::vector<std::vector<bool>> in_d(static_cast<size_t>(k), std::vector<bool>(static_cast<size_t>(m)));
    double pmax = 1.0;
    for (Index j = 0; j < k; ++j) {
        const Fn& p = lower[static_cast<size_t>(centers[static_cast<size_t>(j)])];
        const Fn& q = upper[static_cast<size_t>(centers[static_cast<size_t>(j)])];
        pmax = std::max(pmax, fn::sup_norm(p));
        for (Index x = 0; x < m; ++x) {
            const CMatrix d = p[static_cast<size_t>(x)] - q[static_cast<size_t>(x)];
            in_d[static_cast<size_t>(j)][static_cast<size_t>(x)] =
                strictly_below(-2.0 * delta * id, d, ctx.tol) && strictly_below(d, 2.0 * delta * id, ctx.tol);
        }
    }

    // partition of unity on classes: equal weights over the D_j containing the class
    const int ncls = *std::max_element(ctx.cls.begin(), ctx.cls.end()) + 1;
    std::vector<std::vector<double>> alpha(static_cast<size_t>(k), std::vector<double>(static_cast<size_t>(m), 0.0));
    for (int c = 0; c < ncls; ++c) {
        std::vector<Index> js;
        for (Index j = 0; j < k; ++j) {
            bool all = true;
            for (Index x = 0; x < m; ++x)
                if (ctx.cls[static_cast<size_t>(x)] == c && !in_d[static_cast<size_t>(j)][static_cast<size_t>(x)]) all = false;
            if (all) js.push_back(j);
        }
        require(!js.empty(), ErrorKind::NumericalFailure,
                "class " + std::to_string(c) + " is not contained in any D_j");
        for (Index j : js)
            for (Index x = 0; x < m; ++x)
                if (ctx.cls[static_cast<size_t>(x)] == c)
                    alpha[static_cast<size_t>(j)][static_cast<size_t>(x)] = 1.0 / static_cast<double>(js.size());
    }

    // alpha_j rebuilt in E to within eps/8 in total, then w = sum alpha_j p_j
    const double dp = eps / (16.0 * static_cast<double>(k) * pmax);
    Fn w = fn::zero(m, n);
    for (Index j = 0; j < k; ++j) {
        const Fn aj = class_function(ctx, alpha[static_cast<size_t>(j)], dp, rep.max_exponent);
        w = fn::add(w, fn::product(aj, lower[static_cast<size_t>(centers[static_cast<size_t>(j)])]));
    }
    return w;
}

/// Union-find closure of "M(h(x)) = M(h(y)) for the sampled Hermitian h".
inline std::vector<int> m_equivalence_classes(const FnAlgebra& e, const Tolerance& tol, std::uint64_t seed) {
    std::vector<Fn> herm;
    for (const auto& b : e.basis) {
        herm.push_back(fn::hermitian_part(b));
        herm.push_back(fn::hermitian_part(fn::scale(b, -kI)));
    }
    std::mt19937_64 rng(seed ^ 0x5851f42d4c957f2dULL);
    std::normal_distribution<double> nd(0.0, 1.0);
    const size_t base = herm.size();
    for (int i = 0; i < 50 && base > 0; ++i) {
        Fn f = fn::zero(e.points, e.n);
        for (size_t q = 0; q < base; ++q) f = fn::add(f, herm[q], nd(rng));
        herm.push_back(f);
    }
    const Index m = e.points;
    // M(h(x)) and M(-h(x)) for every sampled h
    std::vector<std::vector<double>> sig(static_cast<size_t>(m));
    std::vector<double> scale(herm.size(), 1.0);
    for (size_t q = 0; q < herm.size(); ++q) {
        scale[q] = std::max(1.0, fn::sup_norm(herm[q]));
        for (Index x = 0; x < m; ++x) {
            const RVector ev = herm_eig(herm[q][static_cast<size_t>(x)], tol).values;
            sig[static_cast<size_t>(x)].push_back(ev.maxCoeff());
            sig[static_cast<size_t>(x)].push_back(-ev.minCoeff());
        }
    }
    std::vector<int> parent(static_cast<size_t>(m));
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int i) { return parent[static_cast<size_t>(i)] == i ? i : parent[static_cast<size_t>(i)] = find(parent[static_cast<size_t>(i)]); };
    for (Index x = 0; x < m; ++x)
        for (Index y = x + 1; y < m; ++y) {
            bool eq = true;
            for (size_t q = 0; q < sig[static_cast<size_t>(x)].size() && eq; ++q)
                eq = std::abs(sig[static_cast<size_t>(x)][q] - sig[static_cast<size_t>(y)][q]) <= 10.0 * tol.psd_slack * scale[q / 2];
            if (eq) parent[static_cast<size_t>(find(static_cast<int>(x)))] = find(static_cast<int>(y));
        }
    std::vector<int> label(static_cast<size_t>(m), -1), out(static_cast<size_t>(m));
    int next = 0;
    for (Index x = 0; x < m; ++x) {
        const int root = find(static_cast<int>(x));
        if (label[static_cast<size_t>(root)] < 0) label[static_cast<size_t>(root)] = next++;
        out[static_cast<size_t>(x)] = label[static_cast<size_t>(root)];
    }
    return out;
}

}  // namespace detail

/// Builds an approximant of f in span(E) following the envelope, power-mean
/// and partition-of-unity construction, and certifies its sup error. The
/// orthogonal projection of f onto span(E) is returned alongside.
inline ApproxReport constructive_approximate(const FnAlgebra& e, const Fn& f, double eps, const Tolerance& tol = {},
                                             std::uint64_t seed = 0) {
    require(eps > 0.0, ErrorKind::DomainError, "eps must be positive");
    e.check(f);
    const UnitReport unit = unit_in_closure(e, tol);
    require(unit.in_closure, ErrorKind::HypothesisViolated, "1_X is not in the closure of E");

    const FnAlgebra d2 = delta2_subspace(e, tol);
    require(d2.distance(f) <= tol.eq_tol * (1.0 + fn::flatten(f).norm()), ErrorKind::PreconditionFailed,
            "target is not in Delta_2(E)");

    detail::SwContext ctx{e, tol, seed, e.columns(), unit.witness, {}, {}};
    ctx.cls = detail::m_equivalence_classes(e, tol, seed);
    const Index m = e.points;
    ctx.witness.assign(static_cast<size_t>(m), std::vector<std::optional<Fn>>(static_cast<size_t>(m)));
    for (Index x = 0; x < m; ++x)
        for (Index y = x + 1; y < m; ++y) {
            const auto v = spectrally_separates(e, x, y, tol, seed, 200, true);
            if (v.certified) {
                ctx.witness[static_cast<size_t>(x)][static_cast<size_t>(y)] = v.witness;
            } else {
                require(ctx.cls[static_cast<size_t>(x)] == ctx.cls[static_cast<size_t>(y)],
                        ErrorKind::HypothesisViolated,
                        "points " + std::to_string(x) + " and " + std::to_string(y) +
                            " are neither spectrally separated nor M-equivalent");
            }
        }

    ApproxReport rep;
    rep.class_count = *std::max_element(ctx.cls.begin(), ctx.cls.end()) + 1;
    const Fn re = fn::hermitian_part(f);
    const Fn im = fn::hermitian_part(fn::scale(f, -kI));
    Fn w;
    const bool hermitian_target = fn::sup_norm(im) <= tol.eq_tol * (1.0 + fn::sup_norm(f));
    if (hermitian_target) {
        w = detail::approximate_hermitian(ctx, re, eps, rep);
    } else {
        const Fn wr = detail::approximate_hermitian(ctx, re, eps / 2.0, rep);
        const Fn wi = detail::approximate_hermitian(ctx, im, eps / 2.0, rep);
        w = fn::add(wr, wi, kI);
    }
    rep.g = e.project(w);
    rep.span_residual = (fn::flatten(w) - fn::flatten(rep.g)).norm();
    require(rep.span_residual <= 1e-6 * (1.0 + fn::flatten(w).norm()), ErrorKind::NumericalFailure,
            "constructed approximant left span(E)");
    rep.error = fn::distance_sup(rep.g, f);
    rep.projection = e.project(f);
    rep.projection_error = fn::distance_sup(rep.projection, f);
    return rep;
}

}  // namespace nhomog
