#include <gtest/gtest.h>

#include "nhomog/n_space.hpp"
#include "test_util.hpp"

using namespace nhomog;
using namespace testutil;

namespace {

EquivariantElement random_element(const FiniteNSpace& s, std::mt19937_64& rng) {
    std::vector<CMatrix> v;
    for (Index i = 0; i < s.m; ++i) v.push_back(gaussian_matrix(s.n, s.n, rng));
    return {s, v};
}

std::vector<CMatrix> point_rep(const FiniteNSpace& s, const PointRef& p) {
    std::vector<CMatrix> images;
    for (const auto& e : algebra_basis(s)) images.push_back(eval_point(e, p));
    return images;
}

}  // namespace

TEST(NSpace, EvalPoint) {
    const FiniteNSpace s(2, 2);
    const EquivariantElement f(s, {sz(), sx()});
    EXPECT_LT((eval_point(f, PointRef(0, identity(2))) - sz()).norm(), 1e-15);
    EXPECT_LT((eval_point(EquivariantElement::unit(s), PointRef(1, haar(2, 3))) - identity(2)).norm(), 1e-14);
    const CMatrix h = make_matrix(2, 2, {1, 1, 1, -1}) / std::sqrt(2.0);
    EXPECT_LT((eval_point(f, PointRef(0, h)) - sx()).norm(), 1e-14);
    EXPECT_THROW(eval_point(f, PointRef(2, identity(2))), Error);
    EXPECT_THROW(PointRef(0, 2.0 * identity(2)), Error);
}

TEST(NSpace, EmptySpaceAndUnit) {
    const FiniteNSpace empty(3, 0);
    EXPECT_EQ(empty.algebra_dim(), 0);
    EXPECT_TRUE(algebra_basis(empty).empty());
    const FiniteNSpace s(2, 3);
    std::mt19937_64 rng(1);
    const EquivariantElement f = random_element(s, rng);
    const EquivariantElement one = EquivariantElement::unit(s);
    for (size_t i = 0; i < 3; ++i) {
        EXPECT_LT(((one * f).values[i] - f.values[i]).norm(), 1e-15);
        EXPECT_LT(((f * one).values[i] - f.values[i]).norm(), 1e-15);
    }
}

TEST(NSpace, IdealExamples) {
    const FiniteNSpace s(2, 3);
    const EquivariantElement g(s, {sx(), CMatrix::Zero(2, 2), sz()});
    const auto corr = ideal_set_correspondence({g}, s);
    EXPECT_EQ(corr.vanishing_set, (std::set<Index>{1}));
    EXPECT_EQ(corr.ideal_basis.size(), 8u);
    const auto none = ideal_set_correspondence({}, s);
    EXPECT_EQ(none.vanishing_set, (std::set<Index>{0, 1, 2}));
    EXPECT_TRUE(none.ideal_basis.empty());
    const auto all = ideal_set_correspondence({EquivariantElement::unit(s)}, s);
    EXPECT_TRUE(all.vanishing_set.empty());
    EXPECT_EQ(all.ideal_basis.size(), 12u);
}

TEST(NSpace, IdealRoundtrip) {
    std::mt19937_64 rng(2);
    std::bernoulli_distribution coin(0.5);
    for (int trial = 0; trial < 100; ++trial) {
        const FiniteNSpace s(1 + trial % 3, 1 + trial % 4);
        std::vector<EquivariantElement> gens;
        const int ng = 1 + trial % 3;
        std::set<Index> support;
        for (Index i = 0; i < s.m; ++i)
            if (coin(rng)) support.insert(i);
        for (int q = 0; q < ng; ++q) {
            EquivariantElement g = random_element(s, rng);
            for (Index i = 0; i < s.m; ++i)
                if (!support.count(i)) g.values[static_cast<size_t>(i)].setZero();
            gens.push_back(g);
        }
        const auto fwd = ideal_set_correspondence(gens, s);
        std::set<Index> expect_a;
        for (Index i = 0; i < s.m; ++i)
            if (!support.count(i)) expect_a.insert(i);
        EXPECT_EQ(fwd.vanishing_set, expect_a);
        const auto back = ideal_of_set(s, fwd.vanishing_set);
        EXPECT_TRUE(same_ideal(fwd.ideal_basis, back.ideal_basis));
        EXPECT_EQ(ideal_set_correspondence(back.ideal_basis, s).vanishing_set, fwd.vanishing_set);
    }
}

TEST(NSpace, ClassifyRepresentation) {
    const FiniteNSpace s(2, 3);
    auto p = classify_matrix_rep(point_rep(s, PointRef(1, identity(2))), s);
    ASSERT_TRUE(p.has_value());
    EXPECT_EQ(p->orbit, 1);
    EXPECT_LT((p->u - identity(2)).norm(), 1e-8);

    const CMatrix u = haar(2, 5);
    p = classify_matrix_rep(point_rep(s, PointRef(0, u)), s);
    ASSERT_TRUE(p.has_value());
    EXPECT_EQ(p->orbit, 0);
    EXPECT_LT((p->u - phase_normalize(u)).norm(), 1e-8);

    EXPECT_FALSE(classify_matrix_rep(std::vector<CMatrix>(12, CMatrix::Zero(2, 2)), s).has_value());

    // a linear map that is not multiplicative
    std::vector<CMatrix> bad = point_rep(s, PointRef(0, identity(2)));
    bad[0] *= 2.0;
    EXPECT_THROW(classify_matrix_rep(bad, s), Error);
}

TEST(NSpace, ClassifyRoundtripRandom) {
    for (int trial = 0; trial < 30; ++trial) {
        const FiniteNSpace s(1 + trial % 4, 1 + trial % 3);
        const Index orbit = trial % s.m;
        const CMatrix u = haar(s.n, 300, static_cast<std::uint64_t>(trial));
        const auto p = classify_matrix_rep(point_rep(s, PointRef(orbit, u)), s);
        ASSERT_TRUE(p.has_value());
        EXPECT_EQ(p->orbit, orbit);
        EXPECT_LT((p->u - phase_normalize(u)).norm(), 1e-8);
    }
}

TEST(NSpace, ExtractMorphism) {
    const FiniteNSpace x(2, 2);
    const FiniteNSpace y(2, 3);
    // Phi(f)(y0) = u.f(x1), Phi(f)(y1) = 0, Phi(f)(y2) = f(x0)
    const CMatrix u = haar(2, 6);
    std::vector<EquivariantElement> images;
    for (const auto& e : algebra_basis(x))
        images.emplace_back(y, std::vector<CMatrix>{u * e.values[1] * u.adjoint(), CMatrix::Zero(2, 2), e.values[0]});
    const Morphism phi = extract_morphism(images, x, y);
    EXPECT_EQ(phi.domain(), (std::set<Index>{0, 2}));
    ASSERT_TRUE(phi.map[0].has_value());
    EXPECT_EQ(phi.map[0]->orbit, 1);
    EXPECT_LT((phi.map[0]->u - phase_normalize(u)).norm(), 1e-8);
    EXPECT_EQ(phi.map[2]->orbit, 0);
    std::mt19937_64 rng(7);
    const EquivariantElement f = random_element(x, rng);
    const EquivariantElement pf = apply_morphism(phi, f);
    EXPECT_LT((pf.values[0] - u * f.values[1] * u.adjoint()).norm(), 1e-8);
    EXPECT_EQ(pf.values[1].norm(), 0.0);

    // identity morphism
    const Morphism id = extract_morphism(algebra_basis(x), x, x);
    for (Index l = 0; l < 2; ++l) {
        EXPECT_EQ(id.map[static_cast<size_t>(l)]->orbit, l);
        EXPECT_LT((id.map[static_cast<size_t>(l)]->u - identity(2)).norm(), 1e-8);
    }
    EXPECT_THROW(extract_morphism(algebra_basis(x), x, FiniteNSpace(3, 1)), Error);
}

TEST(NSpace, GelfandTransformExamples) {
    const auto g = gelfand_transform(MatTuple({sx(), sz()}), 2);
    EXPECT_EQ(g.space.m, 1);
    ASSERT_EQ(g.images.size(), 2u);
    const auto w = unitarily_equivalent(MatTuple({g.images[0].values[0], g.images[1].values[0]}), MatTuple({sx(), sz()}));
    EXPECT_TRUE(w.has_value());

    const auto d = gelfand_transform(MatTuple({diag({1, 2})}), 1);
    EXPECT_EQ(d.space.m, 2);
    std::vector<double> v{d.images[0].values[0](0, 0).real(), d.images[0].values[1](0, 0).real()};
    std::sort(v.begin(), v.end());
    EXPECT_NEAR(v[0], 1, 1e-12);
    EXPECT_NEAR(v[1], 2, 1e-12);

    const auto z = gelfand_transform(MatTuple({CMatrix::Zero(2, 2)}), 2);
    EXPECT_EQ(z.space.m, 0);
    EXPECT_TRUE(z.images[0].values.empty());
    EXPECT_THROW(gelfand_transform(MatTuple({diag({1, 2})}), 2), Error);
}

TEST(NSpace, GelfandIsometry) {
    std::mt19937_64 rng(8);
    const MatTuple a = random_irreducible(2, 2, rng), b = random_irreducible(2, 2, rng);
    const MatTuple t = scrambled_sum({a, b, a.conjugated(haar(2, 1))}, 1, 3);
    const auto g = gelfand_transform(t, 2);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 20; ++trial) {
        StarPolynomial p(2, false);
        p.add_term(Complex(nd(rng), nd(rng)), {{0, false}, {1, true}});
        p.add_term(Complex(nd(rng), nd(rng)), {{1, false}});
        p.add_term(Complex(nd(rng), nd(rng)), {{0, true}, {0, false}, {1, false}});
        const double lhs = op_norm(eval_star_polynomial(p, t));
        EXPECT_NEAR(lhs, gelfand_image(g, p).norm(), 1e-8 * (1 + lhs));
    }
}

TEST(NSpace, RepresentFunctional) {
    const FiniteNSpace s(2, 2);
    NMeasure mu = represent_functional([](const EquivariantElement& f) { return f.values[0].trace(); }, s);
    EXPECT_LT((mu.pairing[0] - identity(2)).norm(), 1e-15);
    EXPECT_EQ(mu.pairing[1].norm(), 0.0);
    mu = represent_functional([](const EquivariantElement& f) { return f.values[1](0, 1); }, s);
    EXPECT_LT((mu.pairing[1] - make_matrix(2, 2, {0, 0, 1, 0})).norm(), 1e-15);
    mu = represent_functional(std::vector<Complex>(8, 0.0), s);
    for (const auto& m : mu.pairing) EXPECT_EQ(m.norm(), 0.0);

    std::mt19937_64 rng(9);
    const FiniteNSpace t(3, 2);
    std::vector<Complex> phi;
    std::normal_distribution<double> nd;
    for (Index i = 0; i < t.algebra_dim(); ++i) phi.emplace_back(nd(rng), nd(rng));
    const NMeasure m1 = represent_functional(phi, t);
    const auto basis = algebra_basis(t);
    for (size_t q = 0; q < basis.size(); ++q) EXPECT_LT(std::abs(integrate_n_measure(basis[q], m1) - phi[q]), 1e-10);
    const NMeasure m2 = represent_functional([&](const EquivariantElement& f) { return integrate_n_measure(f, m1); }, t);
    for (size_t i = 0; i < 2; ++i) EXPECT_LT((m1.pairing[i] - m2.pairing[i]).norm(), 1e-10);
}

TEST(NSpace, IntegrateExamples) {
    const FiniteNSpace s(2, 3);
    const NMeasure third{s, std::vector<CMatrix>(3, identity(2) / 2.0)};
    EXPECT_NEAR(std::abs(integrate_n_measure(EquivariantElement::unit(s), third) - Complex(3)), 0.0, 1e-14);
    const FiniteNSpace one(2, 1);
    EXPECT_NEAR(integrate_n_measure(EquivariantElement(one, {sx()}), NMeasure{one, {sx() / 2.0}}).real(), 1.0, 1e-14);
    EXPECT_EQ(integrate_n_measure(EquivariantElement(one, {sx()}), NMeasure{one, {CMatrix::Zero(2, 2)}}), Complex(0));
    EXPECT_THROW(integrate_n_measure(EquivariantElement::unit(s), NMeasure{one, {sx()}}), Error);
}

TEST(NSpace, SampledIntegralMatchesAveragedTable) {
    // integrating a non-equivariant g against mu equals integrating g^U
    std::mt19937_64 rng(10);
    const FiniteNSpace s(2, 2);
    const std::vector<CMatrix> a{gaussian_matrix(2, 2, rng), gaussian_matrix(2, 2, rng)};
    const CMatrix b = diag({1, -0.5});
    const SampledFunction g = [&](Index i, const CMatrix& u) {
        return CMatrix(a[static_cast<size_t>(i)] * u * b * u.adjoint() * 0.3);
    };
    NMeasure mu{s, {gaussian_matrix(2, 2, rng) * 0.3, gaussian_matrix(2, 2, rng) * 0.3}};
    const long samples = 20000;
    const Complex direct = integrate_sampled_mc(g, mu, {samples, 41});
    const EquivariantElement gu = equivariant_average(g, s, {samples, 42});
    const Complex via = integrate_n_measure(gu, mu);
    double bound = 0.0;
    for (Index i = 0; i < 2; ++i) bound += op_norm(a[static_cast<size_t>(i)] * 0.3) * op_norm(b) * mu.pairing[static_cast<size_t>(i)].norm() * std::sqrt(2.0);
    EXPECT_LT(std::abs(direct - via), 2 * mc_radius(bound, samples));
}
