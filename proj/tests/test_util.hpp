#pragma once

// Shared fixtures and brute-force oracles for the unit tests. The oracles
// deliberately avoid the library's own rank machinery.

#include <random>
#include <vector>

#include <Eigen/Dense>

#include "nhomog/matrix_core.hpp"
#include "nhomog/star_algebra.hpp"
#include "nhomog/haar.hpp"
#include "nhomog/calculus.hpp"

namespace testutil {

using nhomog::CMatrix;
using nhomog::Complex;
using nhomog::Index;
using nhomog::MatTuple;

inline CMatrix sx() { return nhomog::make_matrix(2, 2, {0, 1, 1, 0}); }
inline CMatrix sy() { return nhomog::make_matrix(2, 2, {0, Complex(0, -1), Complex(0, 1), 0}); }
inline CMatrix sz() { return nhomog::make_matrix(2, 2, {1, 0, 0, -1}); }
inline CMatrix e12() { return nhomog::make_matrix(2, 2, {0, 1, 0, 0}); }
inline CMatrix diag(std::vector<Complex> v) {
    CMatrix a = CMatrix::Zero(static_cast<Index>(v.size()), static_cast<Index>(v.size()));
    for (size_t i = 0; i < v.size(); ++i) a(static_cast<Index>(i), static_cast<Index>(i)) = v[i];
    return a;
}

inline CMatrix haar(Index n, std::uint64_t seed, std::uint64_t counter = 0) {
    return nhomog::haar_unitary({n, seed, counter});
}

/// Numerical rank by a plain SVD with a fixed relative cut.
inline Index svd_rank(const CMatrix& m, double rel = 1e-9) {
    Eigen::JacobiSVD<CMatrix> svd(m);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0) return 0;
    Index r = 0;
    while (r < s.size() && s(r) > rel * s(0)) ++r;
    return r;
}

/// Dimension of the span of all words of length 1..max_len.
inline Index brute_word_span_dim(const MatTuple& t, int max_len) {
    const Index d = t.dim();
    const auto letters = t.letters();
    std::vector<CMatrix> level(letters.begin(), letters.end());
    std::vector<CMatrix> all = level;
    for (int len = 2; len <= max_len; ++len) {
        std::vector<CMatrix> next;
        for (const auto& w : level)
            for (const auto& l : letters) next.push_back(w * l);
        all.insert(all.end(), next.begin(), next.end());
        level = std::move(next);
    }
    CMatrix m(d * d, static_cast<Index>(all.size()));
    for (size_t i = 0; i < all.size(); ++i)
        m.col(static_cast<Index>(i)) = Eigen::Map<const nhomog::CVector>(all[i].data(), d * d);
    return svd_rank(m);
}

/// Commutant dimension from the full d^2 x d^2 Kronecker system.
inline Index brute_commutant_dim(const MatTuple& t) {
    const Index d = t.dim();
    const CMatrix id = CMatrix::Identity(d, d);
    const auto letters = t.letters();
    CMatrix sys(static_cast<Index>(letters.size()) * d * d, d * d);
    for (size_t l = 0; l < letters.size(); ++l) {
        const CMatrix& a = letters[l];
        // vec(XA - AX) = (A^T kron I - I kron A) vec X
        CMatrix k1(d * d, d * d), k2(d * d, d * d);
        for (Index i = 0; i < d; ++i)
            for (Index j = 0; j < d; ++j) {
                k1.block(i * d, j * d, d, d) = a(j, i) * id;
                k2.block(i * d, j * d, d, d) = (i == j ? 1.0 : 0.0) * a;
            }
        sys.middleRows(static_cast<Index>(l) * d * d, d * d) = k1 - k2;
    }
    return d * d - svd_rank(sys, 1e-9);
}

/// Two independent Ginibre matrices: irreducible with probability one.
inline MatTuple random_irreducible(Index n, int k, std::mt19937_64& rng) {
    std::vector<CMatrix> g;
    for (int j = 0; j < k; ++j) g.push_back(nhomog::gaussian_matrix(n, n, rng));
    return MatTuple(std::move(g));
}

/// u (blocks_1 + ... + blocks_m + 0_z) u* for a Haar u.
inline MatTuple scrambled_sum(const std::vector<MatTuple>& blocks, Index zero_dim, std::uint64_t seed) {
    const int k = static_cast<int>(blocks.front().size());
    Index d = zero_dim;
    for (const auto& b : blocks) d += b.dim();
    const CMatrix u = haar(d, seed);
    std::vector<CMatrix> g;
    for (int j = 0; j < k; ++j) {
        std::vector<CMatrix> parts;
        for (const auto& b : blocks) parts.push_back(b[j]);
        if (zero_dim > 0) parts.push_back(CMatrix::Zero(zero_dim, zero_dim));
        g.push_back(u * nhomog::direct_sum(parts) * u.adjoint());
    }
    return MatTuple(std::move(g));
}

/// Random *-polynomial with 1 to 4 terms of degree 1 to 3.
inline nhomog::StarPolynomial random_poly(int k, std::mt19937_64& rng, bool unital = false) {
    std::uniform_int_distribution<int> len(1, 3), var(0, k - 1), adj(0, 1), terms(1, 4);
    std::normal_distribution<double> nd;
    nhomog::StarPolynomial p(k, unital);
    const int t = terms(rng);
    for (int i = 0; i < t; ++i) {
        nhomog::Word w;
        const int l = len(rng);
        for (int j = 0; j < l; ++j) w.push_back({var(rng), adj(rng) == 1});
        p.add_term(Complex(nd(rng), nd(rng)), w);
    }
    if (unital) p.add_term(Complex(nd(rng), 0.0), {});
    return p;
}

/// copies blocks of dim n (odd copies are conjugates of one shared block) plus a zero block.
inline MatTuple homogeneous_instance(Index n, int k, int copies, Index zero, std::mt19937_64& rng, std::uint64_t seed) {
    std::vector<MatTuple> blocks;
    const MatTuple a = random_irreducible(n, k, rng);
    for (int c = 0; c < copies; ++c)
        blocks.push_back(c % 2 ? a.conjugated(haar(n, seed, static_cast<std::uint64_t>(c))) : random_irreducible(n, k, rng));
    return scrambled_sum(blocks, zero, seed);
}

inline nhomog::OrbitTable random_table(const nhomog::Decomposition& dec, std::mt19937_64& rng) {
    std::vector<CMatrix> v;
    for (const auto& c : dec.classes) v.push_back(nhomog::gaussian_matrix(c.dim(), c.dim(), rng));
    return nhomog::OrbitTable::from_values(dec, v);
}

}  // namespace testutil
