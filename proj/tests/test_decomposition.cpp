#include <gtest/gtest.h>

#include "nhomog/decomposition.hpp"
#include "test_util.hpp"

using namespace nhomog;
using namespace testutil;

namespace {

void expect_valid(const Decomposition& dec) {
    const Index d = dec.dim();
    EXPECT_LT((dec.v.adjoint() * dec.v - identity(d)).norm(), 1e-8);
    Index total = dec.zero_dim();
    for (size_t c = 0; c < dec.classes.size(); ++c) total += dec.classes[c].dim() * dec.multiplicities[c];
    EXPECT_EQ(total, d);
    for (const auto& b : dec.blocks) {
        EXPECT_LT((b.basis.adjoint() * b.basis - identity(b.rep.dim())).norm(), 1e-8);
        const MatTuple& rep = dec.classes[static_cast<size_t>(b.class_id)];
        EXPECT_TRUE(is_unitary(b.aligner, 1e-8));
        for (Index j = 0; j < rep.size(); ++j) {
            EXPECT_LT((b.basis.adjoint() * dec.source[j] * b.basis - b.rep[j]).norm(), 1e-8 * (1 + b.rep[j].norm()));
            EXPECT_LT((b.aligner * rep[j] * b.aligner.adjoint() - b.rep[j]).norm(), 1e-7 * (1 + rep[j].norm()));
        }
    }
    for (const auto& c : dec.classes) EXPECT_TRUE(is_irreducible(c));
    for (size_t a = 0; a < dec.classes.size(); ++a)
        for (size_t b = a + 1; b < dec.classes.size(); ++b)
            EXPECT_EQ(intertwiners(dec.classes[a], dec.classes[b]).dim(), 0);
    const MatTuple back = reassemble(dec);
    for (Index j = 0; j < dec.source.size(); ++j)
        EXPECT_LT((back[j] - dec.source[j]).norm(), 1e-8 * (1 + dec.source[j].norm()));
}

}  // namespace

TEST(Decomposition, DoubledPauli) {
    const MatTuple p({sx(), sz()});
    const MatTuple t = direct_sum(p, p.conjugated(haar(2, 3)));
    const Decomposition dec = decompose(t, {}, 1);
    expect_valid(dec);
    ASSERT_EQ(dec.class_count(), 1);
    EXPECT_EQ(dec.multiplicities[0], 2);
    EXPECT_EQ(dec.class_dim(0), 2);
}

TEST(Decomposition, Diagonal) {
    const Decomposition dec = decompose(MatTuple({diag({1, 2})}));
    expect_valid(dec);
    ASSERT_EQ(dec.class_count(), 2);
    EXPECT_EQ(dec.multiplicities, (std::vector<int>{1, 1}));
    std::vector<double> vals{dec.classes[0][0](0, 0).real(), dec.classes[1][0](0, 0).real()};
    std::sort(vals.begin(), vals.end());
    EXPECT_NEAR(vals[0], 1, 1e-12);
    EXPECT_NEAR(vals[1], 2, 1e-12);
}

TEST(Decomposition, ZeroTuple) {
    const Decomposition dec = decompose(MatTuple({CMatrix::Zero(2, 2)}));
    EXPECT_EQ(dec.class_count(), 0);
    EXPECT_EQ(dec.zero_dim(), 2);
    EXPECT_TRUE(dec.blocks.empty());
}

TEST(Decomposition, UnitaryEquivalenceExamples) {
    const MatTuple a({sx(), sz()});
    const CMatrix u = haar(2, 21);
    auto w = unitarily_equivalent(a, a.conjugated(u));
    ASSERT_TRUE(w.has_value());
    // equal to u up to a phase
    const Complex ph = (u.adjoint() * *w).trace() / 2.0;
    EXPECT_NEAR(std::abs(ph), 1.0, 1e-8);
    EXPECT_LT((*w - ph * u).norm(), 1e-8);

    w = unitarily_equivalent(a, MatTuple({sz(), sx()}));
    ASSERT_TRUE(w.has_value());
    const CMatrix h = make_matrix(2, 2, {1, 1, 1, -1}) / std::sqrt(2.0);
    const Complex ph2 = (h.adjoint() * *w).trace() / 2.0;
    EXPECT_LT((*w - ph2 * h).norm(), 1e-8);
    EXPECT_NEAR((*w)(0, 0).imag(), 0.0, 1e-12);
    EXPECT_GT((*w)(0, 0).real(), 0.0);

    EXPECT_FALSE(unitarily_equivalent(a, MatTuple({sx(), 2.0 * sz()})).has_value());
    EXPECT_THROW(unitarily_equivalent(MatTuple({diag({1, 2})}), MatTuple({diag({1, 2})})), Error);
}

TEST(Decomposition, FingerprintOrdering) {
    const MatTuple a({sx(), sz()});
    const auto fa = word_trace_fingerprint(a, 3);
    // 4 letters: 4 + 16 + 64 words
    EXPECT_EQ(fa.size(), 84u);
    EXPECT_TRUE(fingerprints_match(fa, word_trace_fingerprint(a.conjugated(haar(2, 8)), 3)));
    EXPECT_FALSE(fingerprints_match(fa, word_trace_fingerprint(MatTuple({sx(), 2.0 * sz()}), 3)));
    // word order check: the first entries are tr(sx), tr(sx sx), tr(sx sx sx), tr(sx sx sz)
    EXPECT_NEAR(std::abs(fa[0]), 0.0, 1e-14);
    EXPECT_NEAR(fa[1].real(), 2.0, 1e-14);
    EXPECT_NEAR(std::abs(fa[2]), 0.0, 1e-14);
}

TEST(Decomposition, HomogeneityVerdicts) {
    EXPECT_TRUE(homogeneity_verdict(MatTuple({sx(), sz()}), 2).is_n_homogeneous);
    const auto r = homogeneity_verdict(MatTuple({direct_sum({sx(), diag({1})}), direct_sum({sz(), diag({1})})}), 2);
    EXPECT_FALSE(r.is_n_homogeneous);
    EXPECT_NE(r.reason.find("block of dim 1"), std::string::npos);
    EXPECT_TRUE(homogeneity_verdict(MatTuple({diag({1, 2})}), 1).is_n_homogeneous);
}

TEST(Decomposition, NSpectrumExamples) {
    NSpectrum s = n_spectrum(MatTuple({sx(), sz()}), 2);
    ASSERT_EQ(s.points.size(), 1u);
    EXPECT_EQ(s.multiplicities[0], 1);
    EXPECT_FALSE(s.zero_in_closure);
    EXPECT_TRUE(unitarily_equivalent(s.points[0], MatTuple({sx(), sz()})).has_value());

    s = n_spectrum(MatTuple({diag({1, 2, 0})}), 1);
    ASSERT_EQ(s.points.size(), 2u);
    EXPECT_TRUE(s.zero_in_closure);

    const MatTuple p({sx(), sz()});
    s = n_spectrum(direct_sum(p, p.conjugated(haar(2, 4))), 2);
    ASSERT_EQ(s.points.size(), 1u);
    EXPECT_EQ(s.multiplicities[0], 2);

    EXPECT_THROW(n_spectrum(MatTuple({diag({1, 2})}), 2), Error);
}

TEST(Decomposition, ReconstructionOnRandomScrambledSums) {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 200; ++trial) {
        const int k = 1 + trial % 3;
        std::vector<MatTuple> blocks;
        const MatTuple shared = random_irreducible(1 + trial % 3, k, rng);
        const int nb = 1 + trial % 4;
        for (int b = 0; b < nb; ++b) {
            if (b % 2 == 0) {
                blocks.push_back(shared.conjugated(haar(shared.dim(), 5000 + static_cast<std::uint64_t>(trial), b)));
            } else {
                blocks.push_back(random_irreducible(1 + (trial + b) % 3, k, rng));
            }
        }
        const Index z = trial % 5 == 0 ? 1 : 0;
        const MatTuple t = scrambled_sum(blocks, z, 7000 + static_cast<std::uint64_t>(trial));
        const Decomposition dec = decompose(t, {}, static_cast<std::uint64_t>(trial));
        const MatTuple back = reassemble(dec);
        for (Index j = 0; j < t.size(); ++j)
            ASSERT_LT((back[j] - t[j]).norm(), 1e-8 * (1 + t[j].norm())) << "trial " << trial;
        EXPECT_EQ(dec.zero_dim(), z);
        EXPECT_EQ(dec.multiplicities.front() >= 1, true);
        if (trial < 40) expect_valid(dec);
    }
}

TEST(Decomposition, SeedIndependence) {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 10; ++trial) {
        const MatTuple a = random_irreducible(2, 2, rng);
        const MatTuple b = random_irreducible(2, 2, rng);
        const MatTuple t = scrambled_sum({a, b, a.conjugated(haar(2, 1)), random_irreducible(1, 2, rng)}, 1,
                                         static_cast<std::uint64_t>(trial));
        const Decomposition ref = decompose(t, {}, 0);
        for (std::uint64_t seed = 1; seed <= 4; ++seed) {
            const Decomposition dec = decompose(t, {}, seed);
            ASSERT_EQ(dec.class_count(), ref.class_count());
            EXPECT_EQ(dec.multiplicities, ref.multiplicities);
            for (Index c = 0; c < dec.class_count(); ++c) {
                EXPECT_EQ(dec.class_dim(c), ref.class_dim(c));
                EXPECT_TRUE(unitarily_equivalent(dec.classes[c], ref.classes[c]).has_value());
            }
        }
    }
}

TEST(Decomposition, UnitalizationImpliesIdentity) {
    // whenever T and (T, I) are both n-homogeneous with n > 1, I lies in C*(T)
    std::mt19937_64 rng(51);
    for (int trial = 0; trial < 30; ++trial) {
        const Index n = 2 + trial % 2;
        std::vector<MatTuple> blocks{random_irreducible(n, 2, rng)};
        if (trial % 3 == 1) blocks.push_back(random_irreducible(n, 2, rng));
        const Index z = trial % 3 == 2 ? 1 : 0;
        const MatTuple t = scrambled_sum(blocks, z, static_cast<std::uint64_t>(trial));
        std::vector<CMatrix> g = t.gens();
        g.push_back(identity(t.dim()));
        const MatTuple unital(g);
        const bool hom = homogeneity_verdict(t, n).is_n_homogeneous;
        const bool hom1 = homogeneity_verdict(unital, n).is_n_homogeneous;
        EXPECT_TRUE(hom);
        EXPECT_EQ(hom1, z == 0);
        if (hom && hom1) {
            EXPECT_TRUE(contains_identity(t));
        }
    }
}
