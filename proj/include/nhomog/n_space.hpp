#pragma once

// Finite n-spaces: a disjoint union of m free U(n)-orbits. Equivariant
// functions on such a space are determined by their values at the orbit base
// points, so C*(X,.) is the direct sum of m copies of M_n.

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "nhomog/calculus.hpp"
#include "nhomog/decomposition.hpp"
#include "nhomog/haar.hpp"

namespace nhomog {

struct FiniteNSpace {
    Index n = 1;
    Index m = 0;
    std::vector<std::string> labels;

    FiniteNSpace() = default;
    FiniteNSpace(Index n_, Index m_) : n(n_), m(m_) {
        require(n >= 1 && m >= 0, ErrorKind::DomainError, "n-space needs n >= 1 and m >= 0");
        for (Index i = 0; i < m; ++i) labels.push_back("x" + std::to_string(i));
    }

    /// dim C*(X,.) = m n^2.
    Index algebra_dim() const { return m * n * n; }

    bool operator==(const FiniteNSpace& o) const { return n == o.n && m == o.m; }

    void check_orbit(Index i) const {
        require(i >= 0 && i < m, ErrorKind::IndexOutOfRange,
                "orbit " + std::to_string(i) + " out of range (m = " + std::to_string(m) + ")");
    }
};

struct EquivariantElement {
    FiniteNSpace space;
    std::vector<CMatrix> values;

    EquivariantElement() = default;
    EquivariantElement(FiniteNSpace s, std::vector<CMatrix> v) : space(std::move(s)), values(std::move(v)) {
        require(static_cast<Index>(values.size()) == space.m, ErrorKind::DimensionMismatch,
                "need one value per orbit");
        for (const auto& x : values)
            require(x.rows() == space.n && x.cols() == space.n, ErrorKind::DimensionMismatch,
                    "orbit values must be n x n");
    }

    static EquivariantElement zero(const FiniteNSpace& s) {
        return {s, std::vector<CMatrix>(static_cast<size_t>(s.m), CMatrix::Zero(s.n, s.n))};
    }

    /// The unit: C*(X,.) is unital because a finite orbit set is compact.
    static EquivariantElement unit(const FiniteNSpace& s) {
        return {s, std::vector<CMatrix>(static_cast<size_t>(s.m), identity(s.n))};
    }

    /// Matrix unit E_ab supported on orbit i.
    static EquivariantElement matrix_unit(const FiniteNSpace& s, Index i, Index a, Index b) {
        s.check_orbit(i);
        EquivariantElement e = zero(s);
        e.values[static_cast<size_t>(i)](a, b) = 1.0;
        return e;
    }

    double norm() const {
        double r = 0.0;
        for (const auto& v : values) r = std::max(r, op_norm(v));
        return r;
    }

    EquivariantElement adjoint() const {
        EquivariantElement e = *this;
        for (auto& v : e.values) v = v.adjoint().eval();
        return e;
    }

    friend EquivariantElement operator*(const EquivariantElement& a, const EquivariantElement& b) {
        require(a.space == b.space, ErrorKind::SpaceMismatch, "elements live on different spaces");
        EquivariantElement e = a;
        for (size_t i = 0; i < e.values.size(); ++i) e.values[i] = a.values[i] * b.values[i];
        return e;
    }

    friend EquivariantElement operator+(const EquivariantElement& a, const EquivariantElement& b) {
        require(a.space == b.space, ErrorKind::SpaceMismatch, "elements live on different spaces");
        EquivariantElement e = a;
        for (size_t i = 0; i < e.values.size(); ++i) e.values[i] += b.values[i];
        return e;
    }

    friend EquivariantElement operator*(Complex c, const EquivariantElement& a) {
        EquivariantElement e = a;
        for (auto& v : e.values) v *= c;
        return e;
    }

    /// Concatenated column-major entries, orbit by orbit.
    CVector flatten() const {
        const Index nn = space.n * space.n;
        CVector out(space.m * nn);
        for (Index i = 0; i < space.m; ++i) out.segment(i * nn, nn) = vec(values[static_cast<size_t>(i)]);
        return out;
    }

    static EquivariantElement unflatten(const FiniteNSpace& s, const CVector& v) {
        const Index nn = s.n * s.n;
        EquivariantElement e = zero(s);
        for (Index i = 0; i < s.m; ++i) e.values[static_cast<size_t>(i)] = unvec(v.segment(i * nn, nn), s.n, s.n);
        return e;
    }
};

/// The standard basis of C*(X,.): matrix units E^i_ab, ordered by orbit,
/// then row a, then column b.
inline std::vector<EquivariantElement> algebra_basis(const FiniteNSpace& s) {
    std::vector<EquivariantElement> out;
    for (Index i = 0; i < s.m; ++i)
        for (Index a = 0; a < s.n; ++a)
            for (Index b = 0; b < s.n; ++b) out.push_back(EquivariantElement::matrix_unit(s, i, a, b));
    return out;
}

inline Index basis_index(const FiniteNSpace& s, Index i, Index a, Index b) { return (i * s.n + a) * s.n + b; }

/// The point u.x_orbit. u is stored phase-normalized; u and e^{it}u name the
/// same point.
struct PointRef {
    Index orbit = 0;
    CMatrix u;

    PointRef() = default;
    PointRef(Index orbit_, const CMatrix& u_) : orbit(orbit_), u(phase_normalize(u_)) {
        require(is_unitary(u, 1e-8), ErrorKind::DomainError, "point representative must be unitary");
    }
};

/// f(u.x) = u f(x) u*.
inline CMatrix eval_point(const EquivariantElement& f, const PointRef& p) {
    f.space.check_orbit(p.orbit);
    require(p.u.rows() == f.space.n, ErrorKind::DimensionMismatch, "unitary has the wrong size");
    return p.u * f.values[static_cast<size_t>(p.orbit)] * p.u.adjoint();
}

// ---------------------------------------------------------------------------
// Ideals and invariant sets

struct IdealCorrespondence {
    std::set<Index> vanishing_set;
    std::vector<EquivariantElement> ideal_basis;  // orthonormal for sum_i tr(G_i* F_i)
};

/// Backward direction: I_A, the functions vanishing on the orbits in A.
inline IdealCorrespondence ideal_of_set(const FiniteNSpace& s, const std::set<Index>& a) {
    for (Index i : a) s.check_orbit(i);
    IdealCorrespondence out{a, {}};
    for (Index i = 0; i < s.m; ++i) {
        if (a.count(i)) continue;
        for (Index p = 0; p < s.n; ++p)
            for (Index q = 0; q < s.n; ++q) out.ideal_basis.push_back(EquivariantElement::matrix_unit(s, i, p, q));
    }
    return out;
}

/// Forward direction: the two-sided ideal generated by gens, as the span of
/// all products E g E' with E, E' matrix units, together with the set of
/// orbits on which it vanishes. The result is checked to equal I_A.
inline IdealCorrespondence ideal_set_correspondence(const std::vector<EquivariantElement>& gens, const FiniteNSpace& s,
                                                    const Tolerance& tol = {}) {
    double scale = 0.0;
    for (const auto& g : gens) {
        require(g.space == s, ErrorKind::SpaceMismatch, "generator lives on a different space");
        scale = std::max(scale, g.norm());
    }
    std::set<Index> a;
    for (Index i = 0; i < s.m; ++i) {
        bool vanishes = true;
        for (const auto& g : gens)
            if (op_norm(g.values[static_cast<size_t>(i)]) > tol.eq_tol * (1.0 + scale)) vanishes = false;
        if (vanishes) a.insert(i);
    }
    // E g E' vanishes unless E and E' sit on the same orbit
    SpanBuilder sb(s.algebra_dim(), tol);
    for (const auto& g : gens) {
        const double gs = std::max(g.norm(), std::numeric_limits<double>::min());
        for (Index i = 0; i < s.m; ++i)
            for (Index p = 0; p < s.n * s.n; ++p)
                for (Index q = 0; q < s.n * s.n; ++q) {
                    if (sb.size() == s.algebra_dim()) break;
                    const EquivariantElement x = EquivariantElement::matrix_unit(s, i, p / s.n, p % s.n) * g *
                                                 EquivariantElement::matrix_unit(s, i, q / s.n, q % s.n);
                    sb.add(x.flatten(), gs);
                }
    }
    IdealCorrespondence out{a, {}};
    for (const auto& v : sb.basis()) out.ideal_basis.push_back(EquivariantElement::unflatten(s, v));
    const Index expect = (s.m - static_cast<Index>(a.size())) * s.n * s.n;
    require(static_cast<Index>(out.ideal_basis.size()) == expect, ErrorKind::NumericalFailure,
            "generated ideal has dim " + std::to_string(out.ideal_basis.size()) + ", expected " +
                std::to_string(expect));
    return out;
}

/// Whether two ideal bases span the same subspace.
inline bool same_ideal(const std::vector<EquivariantElement>& a, const std::vector<EquivariantElement>& b,
                       const Tolerance& tol = {}) {
    if (a.size() != b.size()) return false;
    if (a.empty()) return true;
    const FiniteNSpace& s = a.front().space;
    SpanBuilder sb(s.algebra_dim(), tol);
    for (const auto& x : a) sb.add(x.flatten());
    for (const auto& y : b)
        if (sb.relative_residual(y.flatten()) > 1e-8) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Representations and morphisms

namespace detail {

/// Checks pi(E^i_ab) pi(E^j_cd) = [i=j][b=c] pi(E^i_ad) and pi(E^i_ab)* = pi(E^i_ba).
inline void check_star_hom(const std::vector<CMatrix>& images, const FiniteNSpace& s) {
    require(static_cast<Index>(images.size()) == s.algebra_dim(), ErrorKind::DimensionMismatch,
            "need one image per basis element");
    if (images.empty()) return;
    const Index r = images.front().rows();
    double scale = 1.0;
    for (const auto& x : images) {
        require(x.rows() == r && x.cols() == r, ErrorKind::DimensionMismatch, "images must share one square shape");
        scale = std::max(scale, x.norm() * x.norm());
    }
    const double cut = 1e-6 * scale;
    const CMatrix zero = CMatrix::Zero(r, r);
    for (Index i = 0; i < s.m; ++i)
        for (Index a = 0; a < s.n; ++a)
            for (Index b = 0; b < s.n; ++b) {
                const CMatrix& x = images[static_cast<size_t>(basis_index(s, i, a, b))];
                require((x.adjoint() - images[static_cast<size_t>(basis_index(s, i, b, a))]).norm() <= cut,
                        ErrorKind::NotAStarHom, "map does not preserve adjoints");
                for (Index j = 0; j < s.m; ++j)
                    for (Index c = 0; c < s.n; ++c)
                        for (Index e = 0; e < s.n; ++e) {
                            const CMatrix& y = images[static_cast<size_t>(basis_index(s, j, c, e))];
                            const CMatrix& want =
                                (i == j && b == c) ? images[static_cast<size_t>(basis_index(s, i, a, e))] : zero;
                            require((x * y - want).norm() <= cut, ErrorKind::NotAStarHom,
                                    "map is not multiplicative");
                        }
            }
}

}  // namespace detail

/// Identifies a representation pi: C*(X,.) -> M_n, given by the images of the
/// matrix units, as evaluation at a point u.x_i (or as the zero map).
inline std::optional<PointRef> classify_matrix_rep(const std::vector<CMatrix>& images, const FiniteNSpace& s,
                                                   const Tolerance& tol = {}) {
    detail::check_star_hom(images, s);
    if (images.empty()) return std::nullopt;
    require(images.front().rows() == s.n, ErrorKind::DimensionMismatch, "representation target must be M_n");
    double scale = 1.0;
    for (const auto& x : images) scale = std::max(scale, x.norm());
    std::vector<Index> live;
    for (Index i = 0; i < s.m; ++i) {
        double w = 0.0;
        for (Index a = 0; a < s.n; ++a) w = std::max(w, images[static_cast<size_t>(basis_index(s, i, a, a))].norm());
        if (w > 1e-6 * scale) live.push_back(i);
    }
    if (live.empty()) return std::nullopt;
    require(live.size() == 1, ErrorKind::NumericalFailure, "representation does not vanish on all but one orbit");
    const Index i = live.front();
    std::vector<CMatrix> units, pis;
    for (Index a = 0; a < s.n; ++a)
        for (Index b = 0; b < s.n; ++b) {
            CMatrix e = CMatrix::Zero(s.n, s.n);
            e(a, b) = 1.0;
            units.push_back(e);
            pis.push_back(images[static_cast<size_t>(basis_index(s, i, a, b))]);
        }
    const auto u = detail::equivalence_unitary(MatTuple(units), MatTuple(pis), tol);
    require(u.has_value(), ErrorKind::NumericalFailure, "no unitary aligns the representation with orbit " +
                                                            std::to_string(i));
    const PointRef p(i, *u);
    const auto basis = algebra_basis(s);
    for (size_t q = 0; q < basis.size(); ++q)
        require((eval_point(basis[q], p) - images[q]).norm() <= 1e-6 * scale, ErrorKind::NumericalFailure,
                "recovered point does not reproduce the representation");
    return p;
}

struct Morphism {
    FiniteNSpace source;
    FiniteNSpace target;
    /// For each target orbit y_l: the point phi(y_l) of the source, or nothing
    /// when y_l lies outside the domain U.
    std::vector<std::optional<PointRef>> map;

    std::set<Index> domain() const {
        std::set<Index> u;
        for (size_t l = 0; l < map.size(); ++l)
            if (map[l]) u.insert(static_cast<Index>(l));
        return u;
    }
};

/// Recovers (U, phi) from a *-homomorphism Phi: C*(X,.) -> C*(Y,.) given on
/// the matrix units of X, so that Phi(f)(y) = f(phi(y)) on U and 0 off U.
inline Morphism extract_morphism(const std::vector<EquivariantElement>& images, const FiniteNSpace& x,
                                 const FiniteNSpace& y, const Tolerance& tol = {}) {
    require(x.n == y.n, ErrorKind::SpaceMismatch, "source and target n differ");
    require(static_cast<Index>(images.size()) == x.algebra_dim(), ErrorKind::DimensionMismatch,
            "need one image per basis element");
    for (const auto& e : images) require(e.space == y, ErrorKind::SpaceMismatch, "image lives on the wrong space");
    Morphism out{x, y, {}};
    for (Index l = 0; l < y.m; ++l) {
        std::vector<CMatrix> rep;
        for (const auto& e : images) rep.push_back(e.values[static_cast<size_t>(l)]);
        out.map.push_back(classify_matrix_rep(rep, x, tol));
    }
    return out;
}

/// Phi(f)(y_l) = f(phi(y_l)), zero off the domain.
inline EquivariantElement apply_morphism(const Morphism& phi, const EquivariantElement& f) {
    require(f.space == phi.source, ErrorKind::SpaceMismatch, "element is not on the source space");
    EquivariantElement out = EquivariantElement::zero(phi.target);
    for (size_t l = 0; l < phi.map.size(); ++l)
        if (phi.map[l]) out.values[l] = eval_point(f, *phi.map[l]);
    return out;
}

// ---------------------------------------------------------------------------
// Gelfand transform

struct GelfandTransform {
    FiniteNSpace space;
    std::vector<EquivariantElement> images;
    Decomposition decomposition;
};

/// T |-> (T_j restricted to each spectrum class): one orbit per class.
inline GelfandTransform gelfand_transform(const MatTuple& t, Index n, const Tolerance& tol = {},
                                          std::uint64_t seed = 0) {
    Decomposition dec = decompose(t, tol, seed);
    const HomogeneityReport rep = homogeneity_verdict(dec, n);
    require(rep.is_n_homogeneous, ErrorKind::NotNHomogeneous, rep.reason);
    FiniteNSpace s(n, dec.class_count());
    std::vector<EquivariantElement> images;
    for (Index j = 0; j < t.size(); ++j) {
        std::vector<CMatrix> v;
        for (const auto& c : dec.classes) v.push_back(c[j]);
        images.emplace_back(s, std::move(v));
    }
    return {s, std::move(images), std::move(dec)};
}

/// p(T) transported to C*(X,.).
inline EquivariantElement gelfand_image(const GelfandTransform& g, const StarPolynomial& p) {
    std::vector<CMatrix> v;
    for (const auto& c : g.decomposition.classes) v.push_back(eval_star_polynomial(p, c));
    return {g.space, std::move(v)};
}

// ---------------------------------------------------------------------------
// Functionals and n-measures

/// Atomic n-measure: one pairing matrix per orbit, spread over the orbit by
/// the Haar measure as u M_i u*.
struct NMeasure {
    FiniteNSpace space;
    std::vector<CMatrix> pairing;
};

/// (M_i)_ba = phi(E^i_ab), so that phi(f) = sum_i tr(F_i M_i).
inline NMeasure represent_functional(const std::vector<Complex>& phi_on_basis, const FiniteNSpace& s) {
    require(static_cast<Index>(phi_on_basis.size()) == s.algebra_dim(), ErrorKind::DimensionMismatch,
            "need one functional value per basis element");
    NMeasure mu{s, {}};
    for (Index i = 0; i < s.m; ++i) {
        CMatrix m(s.n, s.n);
        for (Index a = 0; a < s.n; ++a)
            for (Index b = 0; b < s.n; ++b) m(b, a) = phi_on_basis[static_cast<size_t>(basis_index(s, i, a, b))];
        mu.pairing.push_back(m);
    }
    return mu;
}

inline NMeasure represent_functional(const std::function<Complex(const EquivariantElement&)>& phi,
                                     const FiniteNSpace& s) {
    std::vector<Complex> v;
    for (const auto& e : algebra_basis(s)) v.push_back(phi(e));
    return represent_functional(v, s);
}

inline Complex integrate_n_measure(const EquivariantElement& f, const NMeasure& mu) {
    require(f.space == mu.space, ErrorKind::SpaceMismatch, "element and measure live on different spaces");
    Complex acc = 0.0;
    for (size_t i = 0; i < f.values.size(); ++i) acc += (f.values[i] * mu.pairing[i]).trace();
    return acc;
}

/// A function sampled on the orbits, not necessarily equivariant: g(i, u) is
/// its value at the point u.x_i.
using SampledFunction = std::function<CMatrix(Index orbit, const CMatrix& u)>;

/// Monte-Carlo value of  sum_i int tr(g(u.x_i) u M_i u*) du.
inline Complex integrate_sampled_mc(const SampledFunction& g, const NMeasure& mu, const McConfig& mc) {
    require(mc.samples >= kMinMcSamples, ErrorKind::MCBudgetTooSmall,
            "need at least " + std::to_string(kMinMcSamples) + " samples");
    Complex acc = 0.0;
    for (Index i = 0; i < mu.space.m; ++i) {
        HaarSampler s{mu.space.n, mc.seed, 0};
        for (long r = 0; r < mc.samples; ++r) {
            const CMatrix u = next_unitary(s);
            acc += (g(i, u) * u * mu.pairing[static_cast<size_t>(i)] * u.adjoint()).trace();
        }
    }
    return acc / static_cast<double>(mc.samples);
}

/// Monte-Carlo f^U on orbit i (see equivariant_average).
inline CMatrix equivariant_average(const SampledFunction& g, const FiniteNSpace& s, Index orbit, const McConfig& mc) {
    s.check_orbit(orbit);
    return equivariant_average([&](const CMatrix& u) { return g(orbit, u); }, s.n, mc);
}

/// f^U assembled over all orbits.
inline EquivariantElement equivariant_average(const SampledFunction& g, const FiniteNSpace& s, const McConfig& mc) {
    EquivariantElement out = EquivariantElement::zero(s);
    for (Index i = 0; i < s.m; ++i) out.values[static_cast<size_t>(i)] = equivariant_average(g, s, i, mc);
    return out;
}

}  // namespace nhomog
