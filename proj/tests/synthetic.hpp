#pragma once

#include <vector>

#include "semigroup_spectra/linalg.hpp"

namespace fixtures {

// 6x6 matrix with a known spectrum, A = V D V^{-1}, V a seeded perturbation of
// the identity. Its resolvent at any z is available by direct inversion, which
// makes it an exact reference for the resolvent-family machinery.
struct Synthetic {
    std::vector<sgs::cplx> spectrum = {
        {0.3, 0.0}, {-0.2, 1.5}, {-0.2, -1.5}, {-0.7, 0.0}, {-1.1, 0.4}, {-1.1, -0.4}};
    sgs::ComplexMatrix A;

    Synthetic() {
        using namespace sgs;
        int n = static_cast<int>(spectrum.size());
        SplitMix64 rng(42);
        ComplexMatrix V = ComplexMatrix::identity(n);
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) V(i, j) += 0.3 * rng.uniform(-1, 1);
        ComplexMatrix D(n, n);
        for (int i = 0; i < n; ++i) D(i, i) = spectrum[i];
        A = matmul(matmul(V, D), inverse(V));
    }

    sgs::ComplexMatrix resolvent(sgs::cplx z) const {
        using namespace sgs;
        int n = A.rows();
        ComplexMatrix zIA(n, n);
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) zIA(i, j) = (i == j ? z : cplx(0)) - A(i, j);
        return inverse(zIA);
    }
};

} // namespace fixtures
