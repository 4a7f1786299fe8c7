#pragma once

// Random function algebras on finite point sets for the approximation tests.
// Point p carries a label l(p); generator q takes the value u_p G_{q,l(p)} u_p*
// there. Points sharing a label are unitarily conjugate and hence share every
// spectrum, points with distinct labels are generically separated. Optional
// block-diagonal G makes E(x) a proper subalgebra and an optional zero label
// makes every function vanish at that point.

#include <random>
#include <vector>

#include "nhomog/sw_engine.hpp"

namespace testutil {

struct SwInstanceConfig {
    nhomog::Index points = 3;
    nhomog::Index n = 2;
    int gens = 2;
    int labels = 3;             // distinct labels drawn from [0, labels)
    bool block = false;         // G block-diagonal with blocks of size 1 and n-1
    bool zero_point = false;    // point 0 maps to zero
    bool distinct = false;      // force labels 0, 1, 2, ... (needs labels >= points)
};

struct SwInstance {
    nhomog::FnAlgebra e;
    std::vector<int> label;  // -1 for the zero point
};

inline SwInstance make_sw_instance(const SwInstanceConfig& s, std::uint64_t seed) {
    using namespace nhomog;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick(0, s.labels - 1);
    SwInstance out;
    for (Index p = 0; p < s.points; ++p) out.label.push_back(s.distinct ? static_cast<int>(p) : pick(rng));
    if (s.zero_point) out.label[0] = -1;
    std::vector<std::vector<CMatrix>> g(static_cast<size_t>(s.gens));
    for (auto& per_label : g)
        for (int l = 0; l < s.labels; ++l) {
            CMatrix m = gaussian_matrix(s.n, s.n, rng);
            if (s.block && s.n >= 2) {
                m.block(0, 1, 1, s.n - 1).setZero();
                m.block(1, 0, s.n - 1, 1).setZero();
            }
            per_label.push_back(m);
        }
    std::vector<CMatrix> twist;
    for (Index p = 0; p < s.points; ++p)
        twist.push_back(haar_unitary({s.n, seed, static_cast<std::uint64_t>(p) + 1000}));
    std::vector<Fn> gens;
    for (const auto& per_label : g) {
        Fn f;
        for (Index p = 0; p < s.points; ++p) {
            const int l = out.label[static_cast<size_t>(p)];
            const auto& u = twist[static_cast<size_t>(p)];
            f.push_back(l < 0 ? CMatrix(CMatrix::Zero(s.n, s.n))
                              : CMatrix(u * per_label[static_cast<size_t>(l)] * u.adjoint()));
        }
        gens.push_back(f);
    }
    out.e = closure_star_subalgebra(s.points, s.n, gens);
    return out;
}

inline nhomog::Fn random_fn(nhomog::Index points, nhomog::Index n, std::mt19937_64& rng) {
    nhomog::Fn f;
    for (nhomog::Index p = 0; p < points; ++p) f.push_back(nhomog::gaussian_matrix(n, n, rng));
    return f;
}

}  // namespace testutil
