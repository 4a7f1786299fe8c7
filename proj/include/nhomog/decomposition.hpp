#pragma once

// Irreducible block decomposition of a matrix tuple, grouping of the blocks
// into unitary-equivalence classes, the n-homogeneity verdict and the
// n-spectrum.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "nhomog/star_algebra.hpp"

namespace nhomog {

// ---------------------------------------------------------------------------
// Word-trace fingerprints

/// Traces tr(w(T)) of every word w of length 1..max_len in the generators and
/// adjoints, listed in a fixed (depth-first, lexicographic) word order. Equal
/// for unitarily equivalent tuples.
inline std::vector<Complex> word_trace_fingerprint(const MatTuple& t, int max_len) {
    const auto letters = t.letters();
    std::vector<Complex> out;
    std::vector<CMatrix> stack;
    stack.reserve(static_cast<size_t>(max_len));
    // iterative DFS over words; prefix products are reused
    std::vector<size_t> idx;
    idx.reserve(static_cast<size_t>(max_len));
    idx.push_back(0);
    stack.push_back(letters[0]);
    while (!idx.empty()) {
        out.push_back(stack.back().trace());
        if (static_cast<int>(idx.size()) < max_len) {
            idx.push_back(0);
            stack.push_back(stack.back() * letters[0]);
            continue;
        }
        // advance to the next sibling, popping exhausted levels
        while (!idx.empty()) {
            const size_t next = idx.back() + 1;
            idx.pop_back();
            stack.pop_back();
            if (next < letters.size()) {
                idx.push_back(next);
                stack.push_back(stack.empty() ? letters[next] : CMatrix(stack.back() * letters[next]));
                break;
            }
        }
    }
    return out;
}

inline int fingerprint_length(Index dim) {
    return static_cast<int>(std::min<Index>(6, 2 * dim * dim));
}

inline bool fingerprints_match(const std::vector<Complex>& a, const std::vector<Complex>& b, double rel = 1e-6) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i) {
        const double s = 1.0 + std::max(std::abs(a[i]), std::abs(b[i]));
        if (std::abs(a[i] - b[i]) > rel * s) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Unitary equivalence of irreducible tuples

namespace detail {

/// Solves U A_j = B_j U (and for adjoints). Returns the unitary when the
/// intertwiner space is one-dimensional and spanned by a multiple of a
/// unitary, nothing when it is trivial.
inline std::optional<CMatrix> equivalence_unitary(const MatTuple& a, const MatTuple& b, const Tolerance& tol) {
    if (a.dim() != b.dim() || a.size() != b.size()) return std::nullopt;
    const SubspaceBasis ib = intertwiners(a, b, tol);
    if (ib.dim() == 0) return std::nullopt;
    require(ib.dim() == 1, ErrorKind::NumericalFailure,
            "intertwiner space between irreducible tuples has dimension " + std::to_string(ib.dim()));
    const CMatrix& w = ib.basis.front();
    const Index d = w.rows();
    const CMatrix g = w.adjoint() * w;
    const double c = g.trace().real() / static_cast<double>(d);
    if (c <= 0.0 || (g - c * identity(d)).norm() > 1e-6 * c) return std::nullopt;
    CMatrix u = phase_normalize(w / std::sqrt(c));
    return u;
}

}  // namespace detail

/// Returns U with U a_j U* = b_j when the irreducible tuples a and b are
/// unitarily equivalent.
inline std::optional<CMatrix> unitarily_equivalent(const MatTuple& a, const MatTuple& b, const Tolerance& tol = {}) {
    require(a.dim() == b.dim() && a.size() == b.size(), ErrorKind::DimensionMismatch,
            "unitarily_equivalent: tuples differ in shape");
    require(is_irreducible(a, tol), ErrorKind::NotIrreducible, "first tuple is not irreducible");
    require(is_irreducible(b, tol), ErrorKind::NotIrreducible, "second tuple is not irreducible");
    const int len = fingerprint_length(a.dim());
    if (!fingerprints_match(word_trace_fingerprint(a, len), word_trace_fingerprint(b, len))) return std::nullopt;
    return detail::equivalence_unitary(a, b, tol);
}

// ---------------------------------------------------------------------------
// Decomposition

struct Block {
    CMatrix basis;    // d x m isometry onto an invariant subspace
    MatTuple rep;     // basis* T basis
    int class_id = -1;
    CMatrix aligner;  // W with W (class representative) W* = rep
};

struct Decomposition {
    MatTuple source;
    CMatrix v;  // block bases in order, then the zero subspace
    std::vector<Block> blocks;
    CMatrix zero_basis;  // d x z, z = 0 when there is no common null space
    std::vector<MatTuple> classes;
    std::vector<int> multiplicities;
    Tolerance tol;
    std::uint64_t seed = 0;

    Index dim() const { return source.dim(); }
    Index zero_dim() const { return zero_basis.cols(); }
    Index class_count() const { return static_cast<Index>(classes.size()); }
    Index class_dim(Index c) const { return classes[static_cast<size_t>(c)].dim(); }
};

namespace detail {

struct Splitter {
    const MatTuple& source;
    const Tolerance& tol;
    std::mt19937_64 rng;
    double zero_cut;
    std::vector<CMatrix> irreducible;
    std::vector<CMatrix> zero;

    void run(const CMatrix& iso) {
        const MatTuple rep = source.compressed(iso);
        if (rep.max_norm() <= zero_cut) {
            zero.push_back(iso);
            return;
        }
        const SubspaceBasis comm = commutant(rep, tol);
        if (comm.dim() == 1) {
            irreducible.push_back(iso);
            return;
        }
        std::vector<CMatrix> herm;
        for (const auto& x : comm.basis) {
            herm.push_back(x + x.adjoint());
            herm.push_back(kI * (x - x.adjoint()));
        }
        const Index m = iso.cols();
        std::normal_distribution<double> nd(0.0, 1.0);
        for (int attempt = 0; attempt < 5; ++attempt) {
            CMatrix c = CMatrix::Zero(m, m);
            for (const auto& hx : herm) c += nd(rng) * hx;
            c = hermitian_part(c);
            Eigen::SelfAdjointEigenSolver<CMatrix> es(c);
            require(es.info() == Eigen::Success, ErrorKind::NumericalFailure, "splitter eigensolver failed");
            const RVector lam = es.eigenvalues();
            const double s = std::max(std::abs(lam(0)), std::abs(lam(m - 1)));
            std::vector<Index> cuts{0};
            bool degenerate = false;
            for (Index i = 1; i < m; ++i) {
                const double gap = lam(i) - lam(i - 1);
                if (gap > tol.psd_slack * s) {
                    cuts.push_back(i);
                } else if (gap > 1e-10 * s) {
                    degenerate = true;
                }
            }
            cuts.push_back(m);
            if (degenerate || cuts.size() <= 2) continue;
            const CMatrix q = es.eigenvectors();
            for (size_t k = 0; k + 1 < cuts.size(); ++k)
                run(iso * q.middleCols(cuts[k], cuts[k + 1] - cuts[k]));
            return;
        }
        fail(ErrorKind::NumericalFailure, "commutant splitter stayed degenerate after 5 reseeds");
    }
};

inline bool fingerprint_less(const std::vector<Complex>& a, const std::vector<Complex>& b) {
    const size_t n = std::min(a.size(), b.size());
    for (size_t i = 0; i < n; ++i) {
        if (a[i].real() != b[i].real()) return a[i].real() < b[i].real();
        if (a[i].imag() != b[i].imag()) return a[i].imag() < b[i].imag();
    }
    return a.size() < b.size();
}

}  // namespace detail

/// Splits C^d into irreducible invariant subspaces by recursively
/// diagonalising random Hermitian elements of the commutant, then groups
/// the blocks into unitary-equivalence classes.
inline Decomposition decompose(const MatTuple& t, const Tolerance& tol = {}, std::uint64_t seed = 0) {
    tol.validate();
    const Index d = t.dim();
    detail::Splitter splitter{t, tol, std::mt19937_64(seed), tol.eq_tol * (1.0 + t.max_norm()), {}, {}};
    splitter.run(identity(d));

    struct Raw {
        CMatrix basis;
        MatTuple rep;
        std::vector<Complex> fp;
    };
    std::vector<Raw> raw;
    for (const auto& iso : splitter.irreducible) {
        MatTuple rep = t.compressed(iso);
        auto fp = word_trace_fingerprint(rep, fingerprint_length(rep.dim()));
        raw.push_back({iso, std::move(rep), std::move(fp)});
    }
    std::stable_sort(raw.begin(), raw.end(), [](const Raw& a, const Raw& b) {
        if (a.rep.dim() != b.rep.dim()) return a.rep.dim() < b.rep.dim();
        return detail::fingerprint_less(a.fp, b.fp);
    });

    Decomposition dec;
    dec.source = t;
    dec.tol = tol;
    dec.seed = seed;
    std::vector<std::vector<Complex>> class_fp;
    for (auto& r : raw) {
        Block blk{r.basis, r.rep, -1, CMatrix()};
        for (size_t c = 0; c < dec.classes.size(); ++c) {
            if (dec.classes[c].dim() != r.rep.dim() || !fingerprints_match(class_fp[c], r.fp)) continue;
            if (auto w = detail::equivalence_unitary(dec.classes[c], r.rep, tol)) {
                blk.class_id = static_cast<int>(c);
                blk.aligner = *w;
                ++dec.multiplicities[c];
                break;
            }
        }
        if (blk.class_id < 0) {
            blk.class_id = static_cast<int>(dec.classes.size());
            blk.aligner = identity(r.rep.dim());
            dec.classes.push_back(r.rep);
            dec.multiplicities.push_back(1);
            class_fp.push_back(r.fp);
        }
        dec.blocks.push_back(std::move(blk));
    }

    Index z = 0;
    for (const auto& iso : splitter.zero) z += iso.cols();
    dec.zero_basis = CMatrix(d, z);
    Index off = 0;
    for (const auto& iso : splitter.zero) {
        dec.zero_basis.middleCols(off, iso.cols()) = iso;
        off += iso.cols();
    }
    dec.v = CMatrix(d, d);
    off = 0;
    for (const auto& b : dec.blocks) {
        dec.v.middleCols(off, b.basis.cols()) = b.basis;
        off += b.basis.cols();
    }
    dec.v.rightCols(z) = dec.zero_basis;
    require(off + z == d, ErrorKind::NumericalFailure, "decomposition blocks do not fill the space");
    return dec;
}

// ---------------------------------------------------------------------------
// Homogeneity and the n-spectrum

struct HomogeneityReport {
    bool is_n_homogeneous = false;
    Index n = 0;
    std::vector<Index> block_dims;
    Index zero_dim = 0;
    std::string reason;
};

inline HomogeneityReport homogeneity_verdict(const Decomposition& dec, Index n) {
    require(n >= 1, ErrorKind::DomainError, "n must be positive");
    HomogeneityReport rep;
    rep.n = n;
    rep.zero_dim = dec.zero_dim();
    rep.is_n_homogeneous = true;
    for (const auto& b : dec.blocks) {
        rep.block_dims.push_back(b.rep.dim());
        if (b.rep.dim() != n && rep.is_n_homogeneous) {
            rep.is_n_homogeneous = false;
            rep.reason = "block of dim " + std::to_string(b.rep.dim());
        }
    }
    if (rep.is_n_homogeneous)
        rep.reason = dec.blocks.empty() ? "zero algebra" : "all nonzero irreducible blocks have dim " + std::to_string(n);
    return rep;
}

inline HomogeneityReport homogeneity_verdict(const MatTuple& t, Index n, const Tolerance& tol = {},
                                             std::uint64_t seed = 0) {
    return homogeneity_verdict(decompose(t, tol, seed), n);
}

struct NSpectrum {
    Index n = 0;
    std::vector<MatTuple> points;
    std::vector<int> multiplicities;
    /// At finite dimension the spectrum is a finite (compact) set; the zero
    /// tuple is adjoined to its closure exactly when a common null space exists.
    bool zero_in_closure = false;
};

inline NSpectrum n_spectrum(const Decomposition& dec, Index n) {
    const HomogeneityReport rep = homogeneity_verdict(dec, n);
    require(rep.is_n_homogeneous, ErrorKind::NotNHomogeneous, rep.reason);
    return {n, dec.classes, dec.multiplicities, dec.zero_dim() > 0};
}

inline NSpectrum n_spectrum(const MatTuple& t, Index n, const Tolerance& tol = {}, std::uint64_t seed = 0) {
    return n_spectrum(decompose(t, tol, seed), n);
}

/// v diag(blocks) v* reassembled from the block data.
inline MatTuple reassemble(const Decomposition& dec) {
    std::vector<CMatrix> out;
    for (Index j = 0; j < dec.source.size(); ++j) {
        CMatrix a = CMatrix::Zero(dec.dim(), dec.dim());
        for (const auto& b : dec.blocks) a += b.basis * b.rep[j] * b.basis.adjoint();
        out.push_back(a);
    }
    return MatTuple(std::move(out));
}

}  // namespace nhomog
