#pragma once

// Haar-distributed unitaries, the exact first-moment twirl and Monte-Carlo
// equivariant averaging.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>

#include "nhomog/matrix_core.hpp"

namespace nhomog {

/// Draw descriptor. A draw depends only on (n, seed, counter).
struct HaarSampler {
    Index n = 1;
    std::uint64_t seed = 0;
    std::uint64_t counter = 0;
};

/// Ginibre matrix -> QR -> fix the phases of R's diagonal. Without the phase
/// fix the distribution is not Haar.
inline CMatrix haar_unitary(const HaarSampler& s) {
    require(s.n >= 1, ErrorKind::DomainError, "haar_unitary: n must be positive");
    std::seed_seq seq{static_cast<std::uint32_t>(s.seed), static_cast<std::uint32_t>(s.seed >> 32),
                      static_cast<std::uint32_t>(s.counter), static_cast<std::uint32_t>(s.counter >> 32),
                      static_cast<std::uint32_t>(s.n)};
    std::mt19937_64 rng(seq);
    const CMatrix z = gaussian_matrix(s.n, s.n, rng);
    Eigen::HouseholderQR<CMatrix> qr(z);
    CMatrix q = qr.householderQ() * CMatrix::Identity(s.n, s.n);
    const CMatrix r = qr.matrixQR();
    for (Index j = 0; j < s.n; ++j) {
        const Complex d = r(j, j);
        const double m = std::abs(d);
        if (m > 0.0) q.col(j) *= d / m;
    }
    return q;
}

/// Returns the unitary for the current counter and advances it.
inline CMatrix next_unitary(HaarSampler& s) {
    CMatrix u = haar_unitary(s);
    ++s.counter;
    return u;
}

/// Exact Haar average of u a u*: (tr a / n) I.
inline CMatrix twirl_exact(const CMatrix& a) {
    require(a.rows() == a.cols() && a.rows() > 0, ErrorKind::NotSquare, "twirl_exact needs a square matrix");
    const Index n = a.rows();
    return (a.trace() / static_cast<double>(n)) * identity(n);
}

struct McConfig {
    long samples = 20000;
    std::uint64_t seed = 0;
};

inline constexpr long kMinMcSamples = 1000;

/// 6 sigma acceptance radius for a Monte-Carlo mean of a quantity bounded by `bound`.
inline double mc_radius(double bound, long samples) {
    return 6.0 * bound / std::sqrt(static_cast<double>(samples));
}

/// Estimates the twisted average  int U* g(U) U dU  where g(U) is the value of
/// a function at the orbit point U.x. For an equivariant g the integrand is
/// constant and the estimate is exact up to rounding.
inline CMatrix equivariant_average(const std::function<CMatrix(const CMatrix&)>& g_at, Index n, const McConfig& mc) {
    require(mc.samples >= kMinMcSamples, ErrorKind::MCBudgetTooSmall,
            "need at least " + std::to_string(kMinMcSamples) + " samples");
    HaarSampler s{n, mc.seed, 0};
    CMatrix acc = CMatrix::Zero(n, n);
    for (long i = 0; i < mc.samples; ++i) {
        const CMatrix u = next_unitary(s);
        const CMatrix v = g_at(u);
        require(v.rows() == n && v.cols() == n, ErrorKind::DimensionMismatch, "sampled value has wrong shape");
        acc += u.adjoint() * v * u;
    }
    return acc / static_cast<double>(mc.samples);
}

}  // namespace nhomog
