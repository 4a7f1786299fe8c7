#pragma once

// Functional calculus for n-homogeneous tuples: *-polynomials, orbit tables,
// f |-> f(T), spectral projections and the atomic spectral n-measure.

#include <cctype>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "nhomog/decomposition.hpp"
#include "nhomog/haar.hpp"

namespace nhomog {

// ---------------------------------------------------------------------------
// *-polynomials

struct Letter {
    int var = 0;  // 0-based generator index
    bool adjoint = false;
    bool operator==(const Letter&) const = default;
};

using Word = std::vector<Letter>;

/// Noncommutative polynomial in z_1..z_k and their adjoints. Constant terms
/// (empty words) are only allowed in unital mode.
class StarPolynomial {
public:
    struct Term {
        Complex coef;
        Word word;
    };

    StarPolynomial(int arity, bool unital) : arity_(arity), unital_(unital) {
        require(arity >= 1, ErrorKind::ArityMismatch, "polynomial arity must be positive");
    }

    static StarPolynomial variable(int arity, int j, bool unital = false) {
        StarPolynomial p(arity, unital);
        p.add_term(1.0, {Letter{j, false}});
        return p;
    }

    static StarPolynomial constant(int arity, Complex c) {
        StarPolynomial p(arity, true);
        p.add_term(c, {});
        return p;
    }

    int arity() const { return arity_; }
    bool unital() const { return unital_; }
    const std::vector<Term>& terms() const { return terms_; }

    void add_term(Complex coef, Word word) {
        require(std::isfinite(coef.real()) && std::isfinite(coef.imag()), ErrorKind::DomainError,
                "non-finite coefficient");
        require(unital_ || !word.empty(), ErrorKind::DomainError, "constant term in a non-unital polynomial");
        for (const auto& l : word)
            require(l.var >= 0 && l.var < arity_, ErrorKind::ArityMismatch,
                    "variable z" + std::to_string(l.var + 1) + " exceeds arity " + std::to_string(arity_));
        terms_.push_back({coef, std::move(word)});
    }

    Complex constant_term() const {
        Complex c = 0.0;
        for (const auto& t : terms_)
            if (t.word.empty()) c += t.coef;
        return c;
    }

    StarPolynomial adjoint() const {
        StarPolynomial out(arity_, unital_);
        for (const auto& t : terms_) {
            Word w(t.word.rbegin(), t.word.rend());
            for (auto& l : w) l.adjoint = !l.adjoint;
            out.terms_.push_back({std::conj(t.coef), std::move(w)});
        }
        return out;
    }

    friend StarPolynomial operator+(const StarPolynomial& a, const StarPolynomial& b) {
        check_compatible(a, b);
        StarPolynomial out(a.arity_, a.unital_ || b.unital_);
        out.terms_ = a.terms_;
        out.terms_.insert(out.terms_.end(), b.terms_.begin(), b.terms_.end());
        return out;
    }

    friend StarPolynomial operator*(const StarPolynomial& a, const StarPolynomial& b) {
        check_compatible(a, b);
        StarPolynomial out(a.arity_, a.unital_ || b.unital_);
        for (const auto& s : a.terms_)
            for (const auto& t : b.terms_) {
                Word w = s.word;
                w.insert(w.end(), t.word.begin(), t.word.end());
                out.terms_.push_back({s.coef * t.coef, std::move(w)});
            }
        return out;
    }

    friend StarPolynomial operator*(Complex c, const StarPolynomial& p) {
        StarPolynomial out = p;
        for (auto& t : out.terms_) t.coef *= c;
        return out;
    }

    std::string to_string() const {
        std::string s;
        for (size_t i = 0; i < terms_.size(); ++i) {
            if (i) s += " + ";
            const auto& t = terms_[i];
            s += "(" + fmt(t.coef.real()) + (t.coef.imag() < 0 ? "-" : "+") + fmt(std::abs(t.coef.imag())) + "i)";
            for (const auto& l : t.word) s += "*z" + std::to_string(l.var + 1) + (l.adjoint ? "'" : "");
        }
        return s.empty() ? "0" : s;
    }

private:
    static std::string fmt(double x) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", x);
        return buf;
    }

    static void check_compatible(const StarPolynomial& a, const StarPolynomial& b) {
        require(a.arity_ == b.arity_, ErrorKind::ArityMismatch, "polynomials of different arity");
    }

    int arity_;
    bool unital_;
    std::vector<Term> terms_;
};

/// Parses "2.5*z1*z2'*z1 - i*z2 + (1-2i)". Numeric factors may carry a
/// trailing `i`; `'` marks an adjoint. arity <= 0 infers it from the largest index.
inline StarPolynomial parse_star_polynomial(const std::string& text, int arity, bool unital) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s += c;
    require(!s.empty(), ErrorKind::ParseError, "empty polynomial");

    struct RawTerm {
        Complex coef;
        Word word;
    };
    std::vector<RawTerm> raw;
    size_t pos = 0;
    int max_var = 0;
    auto error = [&](const std::string& msg) {
        fail(ErrorKind::ParseError, msg + " at position " + std::to_string(pos) + " in \"" + s + "\"");
    };
    while (pos < s.size()) {
        Complex sign = 1.0;
        if (s[pos] == '+' || s[pos] == '-') {
            if (s[pos] == '-') sign = -1.0;
            ++pos;
        } else if (!raw.empty()) {
            error("expected '+' or '-'");
        }
        RawTerm term{sign, {}};
        bool first = true;
        while (true) {
            if (!first) {
                if (pos < s.size() && s[pos] == '*') {
                    ++pos;
                } else {
                    break;
                }
            }
            first = false;
            if (pos >= s.size()) error("unexpected end of input");
            if (s[pos] == 'z') {
                ++pos;
                size_t end = pos;
                while (end < s.size() && std::isdigit(static_cast<unsigned char>(s[end]))) ++end;
                if (end == pos) error("expected a variable index");
                const int idx = std::stoi(s.substr(pos, end - pos));
                if (idx < 1) error("variable indices start at 1");
                pos = end;
                bool adj = false;
                while (pos < s.size() && s[pos] == '\'') {
                    adj = !adj;
                    ++pos;
                }
                term.word.push_back({idx - 1, adj});
                max_var = std::max(max_var, idx);
            } else if (s[pos] == '(') {
                // complex literal such as (1.5-2i)
                const size_t close = s.find(')', pos);
                if (close == std::string::npos) error("unbalanced parenthesis");
                const std::string inner = s.substr(pos + 1, close - pos - 1);
                if (inner.empty()) error("empty parentheses");
                Complex c = 0.0;
                size_t q = 0;
                while (q < inner.size()) {
                    size_t used = 0;
                    double v = 1.0;
                    const bool bare_i = inner[q] == 'i' || ((inner[q] == '+' || inner[q] == '-') && q + 1 < inner.size() && inner[q + 1] == 'i');
                    if (bare_i) {
                        v = inner[q] == '-' ? -1.0 : 1.0;
                        used = inner[q] == 'i' ? 0 : 1;
                    } else {
                        try {
                            v = std::stod(inner.substr(q), &used);
                        } catch (const std::exception&) {
                            error("bad complex literal");
                        }
                    }
                    q += used;
                    if (q < inner.size() && inner[q] == 'i') {
                        c += v * kI;
                        ++q;
                    } else {
                        c += v;
                    }
                    if (q < inner.size() && inner[q] != '+' && inner[q] != '-') error("bad complex literal");
                }
                term.coef *= c;
                pos = close + 1;
            } else if (s[pos] == 'i') {
                ++pos;
                term.coef *= kI;
            } else if (std::isdigit(static_cast<unsigned char>(s[pos])) || s[pos] == '.') {
                size_t used = 0;
                double v = 0.0;
                try {
                    v = std::stod(s.substr(pos), &used);
                } catch (const std::exception&) {
                    error("bad number");
                }
                pos += used;
                Complex c = v;
                if (pos < s.size() && s[pos] == 'i') {
                    c *= kI;
                    ++pos;
                }
                term.coef *= c;
            } else {
                error(std::string("unexpected character '") + s[pos] + "'");
            }
        }
        raw.push_back(std::move(term));
    }
    if (arity <= 0) arity = std::max(max_var, 1);
    require(max_var <= arity, ErrorKind::ArityMismatch,
            "polynomial uses z" + std::to_string(max_var) + " but arity is " + std::to_string(arity));
    StarPolynomial p(arity, unital);
    for (auto& t : raw) {
        if (t.word.empty() && !unital) fail(ErrorKind::ParseError, "constant term requires unital mode");
        p.add_term(t.coef, std::move(t.word));
    }
    return p;
}

inline CMatrix eval_star_polynomial(const StarPolynomial& p, const MatTuple& t) {
    require(p.arity() == t.size(), ErrorKind::ArityMismatch,
            "polynomial arity " + std::to_string(p.arity()) + " vs tuple size " + std::to_string(t.size()));
    const Index d = t.dim();
    CMatrix out = CMatrix::Zero(d, d);
    for (const auto& term : p.terms()) {
        CMatrix m = identity(d);
        for (const auto& l : term.word) {
            const CMatrix& g = t[l.var];
            if (l.adjoint) {
                m = m * g.adjoint();
            } else {
                m = m * g;
            }
        }
        out += term.coef * m;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Orbit tables

/// The value of an equivariant function at each class representative. The
/// representatives travel with the table so that a table built for one
/// choice of representatives cannot silently be applied to another.
struct OrbitTable {
    std::vector<MatTuple> representatives;
    std::vector<CMatrix> values;

    Index size() const { return static_cast<Index>(values.size()); }

    static OrbitTable from_values(const Decomposition& dec, std::vector<CMatrix> values) {
        return {dec.classes, std::move(values)};
    }

    static OrbitTable coordinate(const Decomposition& dec, Index j) {
        OrbitTable t{dec.classes, {}};
        for (const auto& c : dec.classes) t.values.push_back(c[j]);
        return t;
    }

    static OrbitTable unit(const Decomposition& dec) {
        OrbitTable t{dec.classes, {}};
        for (const auto& c : dec.classes) t.values.push_back(identity(c.dim()));
        return t;
    }

    static OrbitTable zero(const Decomposition& dec) {
        OrbitTable t{dec.classes, {}};
        for (const auto& c : dec.classes) t.values.push_back(CMatrix::Zero(c.dim(), c.dim()));
        return t;
    }

    static OrbitTable from_polynomial(const Decomposition& dec, const StarPolynomial& p) {
        OrbitTable t{dec.classes, {}};
        for (const auto& c : dec.classes) t.values.push_back(eval_star_polynomial(p, c));
        return t;
    }

    double sup_norm() const {
        double m = 0.0;
        for (const auto& v : values) m = std::max(m, op_norm(v));
        return m;
    }

    OrbitTable adjoint() const {
        OrbitTable t{representatives, {}};
        for (const auto& v : values) t.values.push_back(v.adjoint());
        return t;
    }

    friend OrbitTable operator*(const OrbitTable& a, const OrbitTable& b) {
        require(a.size() == b.size(), ErrorKind::TableMismatch, "table sizes differ");
        OrbitTable t{a.representatives, {}};
        for (Index i = 0; i < a.size(); ++i) t.values.push_back(a.values[i] * b.values[i]);
        return t;
    }

    friend OrbitTable operator+(const OrbitTable& a, const OrbitTable& b) {
        require(a.size() == b.size(), ErrorKind::TableMismatch, "table sizes differ");
        OrbitTable t{a.representatives, {}};
        for (Index i = 0; i < a.size(); ++i) t.values.push_back(a.values[i] + b.values[i]);
        return t;
    }

    friend OrbitTable operator*(Complex c, const OrbitTable& a) {
        OrbitTable t{a.representatives, {}};
        for (const auto& v : a.values) t.values.push_back(c * v);
        return t;
    }
};

namespace detail {

inline Index homogeneous_dim(const Decomposition& dec) {
    if (dec.classes.empty()) return 0;
    const Index n = dec.classes.front().dim();
    for (const auto& c : dec.classes)
        require(c.dim() == n, ErrorKind::NotNHomogeneous, "classes of different dimensions");
    return n;
}

inline void check_table(const OrbitTable& f, const Decomposition& dec) {
    require(f.size() == dec.class_count(), ErrorKind::TableMismatch,
            "table has " + std::to_string(f.size()) + " entries, decomposition has " +
                std::to_string(dec.class_count()) + " classes");
    require(f.representatives.size() == dec.classes.size(), ErrorKind::TableMismatch,
            "table carries the wrong number of representatives");
    for (size_t i = 0; i < dec.classes.size(); ++i) {
        const MatTuple& a = f.representatives[i];
        const MatTuple& b = dec.classes[i];
        require(a.dim() == b.dim() && a.size() == b.size(), ErrorKind::TableMismatch,
                "representative shape differs");
        for (Index j = 0; j < a.size(); ++j)
            require((a[j] - b[j]).norm() <= dec.tol.eq_tol * (1.0 + b[j].norm()), ErrorKind::TableMismatch,
                    "table was built for different class representatives");
        require(f.values[i].rows() == b.dim() && f.values[i].cols() == b.dim(), ErrorKind::TableMismatch,
                "table value has the wrong size");
    }
}

}  // namespace detail

/// f(T) = v diag(W_b F_class(b) W_b*) v*, zero on the common null space.
inline CMatrix calc(const OrbitTable& f, const Decomposition& dec) {
    detail::homogeneous_dim(dec);
    detail::check_table(f, dec);
    const Index d = dec.dim();
    CMatrix out = CMatrix::Zero(d, d);
    for (const auto& b : dec.blocks) {
        const CMatrix& w = b.aligner;
        out += b.basis * (w * f.values[static_cast<size_t>(b.class_id)] * w.adjoint()) * b.basis.adjoint();
    }
    return out;
}

/// Projection onto the span of the blocks whose class lies in s.
inline CMatrix invariant_spectral_projection(const Decomposition& dec, const std::set<Index>& s) {
    for (Index i : s)
        require(i >= 0 && i < dec.class_count(), ErrorKind::IndexOutOfRange,
                "class index " + std::to_string(i) + " out of range");
    const Index d = dec.dim();
    CMatrix out = CMatrix::Zero(d, d);
    for (const auto& b : dec.blocks)
        if (s.count(b.class_id)) out += b.basis * b.basis.adjoint();
    return out;
}

inline std::set<Index> all_classes(const Decomposition& dec) {
    std::set<Index> s;
    for (Index i = 0; i < dec.class_count(); ++i) s.insert(i);
    return s;
}

/// Polynomial input: both the direct evaluation and the decomposition route
/// are computed and must agree.
inline CMatrix calc(const StarPolynomial& p, const Decomposition& dec) {
    const CMatrix via = calc(OrbitTable::from_polynomial(dec, p), dec);
    CMatrix direct = eval_star_polynomial(p, dec.source);
    // a constant term acts as c*I directly but only as c*(unit of C*(T)) through the blocks
    const Complex c0 = p.constant_term();
    if (c0 != Complex{}) direct -= c0 * (dec.zero_basis * dec.zero_basis.adjoint());
    const double err = (via - direct).norm();
    require(err <= 1e-8 * (1.0 + direct.norm()), ErrorKind::NumericalFailure,
            "calculus paths disagree by " + std::to_string(err));
    return via;
}

inline MatTuple reconstruct_generators(const Decomposition& dec) {
    std::vector<CMatrix> out;
    for (Index j = 0; j < dec.source.size(); ++j) out.push_back(calc(OrbitTable::coordinate(dec, j), dec));
    return MatTuple(std::move(out));
}

// ---------------------------------------------------------------------------
// Spectral n-measure

/// A subset of one orbit. Predicate regions receive a unitary u, meaning the
/// orbit point u.x_i (x_i the class representative).
struct OrbitRegion {
    enum class Kind { Whole, Empty, Predicate };
    Kind kind = Kind::Whole;
    std::function<bool(const CMatrix&)> contains;

    static OrbitRegion whole() { return {Kind::Whole, {}}; }
    static OrbitRegion empty() { return {Kind::Empty, {}}; }
    static OrbitRegion predicate(std::function<bool(const CMatrix&)> f) { return {Kind::Predicate, std::move(f)}; }
};

/// Entry E_jk(A) of the spectral n-measure for a region A of orbit i
/// (j, k are 0-based). On each copy y = W.x_i of the class,
///   E_jk(A) = int chi_A(U.y) U* e_k e_j^T U dU,
/// assembled over copies and placed on their subspaces. Whole-orbit and
/// empty regions are evaluated exactly.
inline CMatrix n_measure_entry_mc(const Decomposition& dec, Index class_i, Index j, Index k, const OrbitRegion& region,
                                  const McConfig& mc) {
    const Index n = detail::homogeneous_dim(dec);
    require(class_i >= 0 && class_i < dec.class_count(), ErrorKind::IndexOutOfRange, "class index out of range");
    require(j >= 0 && j < n && k >= 0 && k < n, ErrorKind::IndexOutOfRange, "matrix-unit index out of range");
    const Index d = dec.dim();
    if (region.kind == OrbitRegion::Kind::Empty) return CMatrix::Zero(d, d);
    if (region.kind == OrbitRegion::Kind::Whole) {
        if (j != k) return CMatrix::Zero(d, d);
        return invariant_spectral_projection(dec, {class_i}) / static_cast<double>(n);
    }
    require(mc.samples >= kMinMcSamples, ErrorKind::MCBudgetTooSmall,
            "need at least " + std::to_string(kMinMcSamples) + " samples");
    CMatrix ekj = CMatrix::Zero(n, n);
    ekj(k, j) = 1.0;
    CMatrix out = CMatrix::Zero(d, d);
    for (const auto& b : dec.blocks) {
        if (b.class_id != class_i) continue;
        HaarSampler s{n, mc.seed, 0};
        CMatrix acc = CMatrix::Zero(n, n);
        for (long r = 0; r < mc.samples; ++r) {
            const CMatrix u = next_unitary(s);
            if (region.contains(u * b.aligner)) acc += u.adjoint() * ekj * u;
        }
        acc /= static_cast<double>(mc.samples);
        out += b.basis * acc * b.basis.adjoint();
    }
    return out;
}

/// ||(calc(table_m) - calc(f)) h|| for each m.
inline std::vector<double> dominated_convergence_run(const Decomposition& dec, const std::vector<OrbitTable>& tables,
                                                     const OrbitTable& f, const CVector& h) {
    require(h.size() == dec.dim(), ErrorKind::DimensionMismatch, "vector length differs from d");
    double bound = 0.0;
    for (const auto& t : tables) {
        detail::check_table(t, dec);
        bound = std::max(bound, t.sup_norm());
    }
    require(std::isfinite(bound), ErrorKind::DomainError, "tables are not uniformly bounded");
    const CMatrix limit = calc(f, dec);
    std::vector<double> out;
    for (const auto& t : tables) out.push_back(((calc(t, dec) - limit) * h).norm());
    return out;
}

}  // namespace nhomog
