// Library tour: decompose a tuple, evaluate the functional calculus, and run
// the approximation engine on a small function algebra.

#include <iostream>

#include "nhomog/calculus.hpp"
#include "nhomog/decomposition.hpp"
#include "nhomog/sw_engine.hpp"

int main() {
    using namespace nhomog;
    const CMatrix sx = make_matrix(2, 2, {0, 1, 1, 0});
    const CMatrix sz = make_matrix(2, 2, {1, 0, 0, -1});

    // (sx, sz) + a conjugated copy + a zero block, mixed by a Haar unitary
    const CMatrix w = haar_unitary({2, 1, 0});
    const CMatrix u = haar_unitary({5, 2, 0});
    const MatTuple t({u * direct_sum({sx, w * sx * w.adjoint(), CMatrix::Zero(1, 1)}) * u.adjoint(),
                      u * direct_sum({sz, w * sz * w.adjoint(), CMatrix::Zero(1, 1)}) * u.adjoint()});

    const Decomposition dec = decompose(t);
    const HomogeneityReport rep = homogeneity_verdict(dec, 2);
    std::cout << "2-homogeneous: " << std::boolalpha << rep.is_n_homogeneous << ", classes: " << dec.class_count()
              << ", multiplicity: " << dec.multiplicities[0] << ", zero dim: " << dec.zero_dim() << "\n";

    const StarPolynomial p = parse_star_polynomial("z1*z2 - z2*z1", 2, false);
    std::cout << "|calc(p) - p(T)| = " << (calc(p, dec) - eval_star_polynomial(p, t)).norm() << "\n";

    // diagonal-valued functions on two points: separating but not full
    const CMatrix d12 = make_matrix(2, 2, {1, 0, 0, 2}), d34 = make_matrix(2, 2, {3, 0, 0, 4});
    const Fn g1{d12, d34}, g2{identity(2), CMatrix::Zero(2, 2)};
    const FnAlgebra e = closure_star_subalgebra(2, 2, {g1, g2});
    const DensityReport d = density_check(e);
    std::cout << "dim E = " << e.dim() << " of " << e.ambient_dim() << ", dense: " << d.dense << "\n";
    const Fn f = e.project(Fn{sx + sz, d12});
    const ApproxReport a = constructive_approximate(e, f, 0.05);
    std::cout << "constructive error " << a.error << ", projection error " << a.projection_error << "\n";
    return 0;
}
