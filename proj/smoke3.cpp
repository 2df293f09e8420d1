#include <cstdio>

#include "semigroup_spectra/measure.hpp"

using namespace sgs;

static SuspensionModel doubling(bool perturbed) {
    BranchedMap1D base({{{0.0, 0.5}, Polynomial({0.0, 2.0}), true},
                        {{0.5, 1.0}, Polynomial({-1.0, 2.0}), true}});
    Polynomial r = perturbed
                       ? Polynomial({1.0, 3.117691453623979, -9.353074360871937, 6.235382907247958})
                       : Polynomial({1.0});
    RoofFunction roof({{{0.0, 0.5}, r}, {{0.5, 1.0}, r}});
    return SuspensionModel(std::move(base), std::move(roof), std::log(2.0), 0.1);
}

static double col_sum_dev(const ComplexMatrix& m) {
    double worst = 0.0;
    for (int j = 0; j < m.cols(); ++j) {
        cplx s = 0.0;
        for (int i = 0; i < m.rows(); ++i) s += m(i, j);
        worst = std::max(worst, std::abs(s - 1.0));
    }
    return worst;
}

int main() {
    auto m = doubling(false);
    auto basis = CellBasis::build(m, 16, 16);
    std::printf("cells=%d\n", basis.n_cells());

    auto id = assemble_transfer(m, basis, 0.0);
    double iddev = 0.0;
    for (int i = 0; i < basis.n_cells(); ++i)
        for (int j = 0; j < basis.n_cells(); ++j)
            iddev = std::max(iddev, std::abs(id.mat(i, j) - (i == j ? 1.0 : 0.0)));
    std::printf("t=0 identity dev=%.3e\n", iddev);

    for (double t : {0.3, 1.0, 2.7}) {
        auto M = assemble_transfer(m, basis, t);
        std::printf("t=%.1f colsum dev=%.3e tvnorm=%.12f\n", t, col_sum_dev(M.mat),
                    tv_opnorm(M.mat));
    }

    // invariant: uniform measure fixed exactly
    auto M1 = assemble_transfer(m, basis, 1.3);
    auto u = uniform_measure(basis);
    auto Mu = apply_matrix(M1, u);
    double udev = 0.0;
    for (int i = 0; i < basis.n_cells(); ++i) udev = std::max(udev, std::abs(Mu.coeffs[i] - u.coeffs[i]));
    std::printf("uniform invariance dev=%.3e tv(u)=%.12f mass=%.12f\n", udev, tv_norm(u),
                mass_functional(u).real());

    // average operator: occupation column sums, mu* fixed
    auto A = average_operator(m, basis, 0.7);
    std::printf("average colsum dev=%.3e\n", col_sum_dev(A.mat));
    auto Au = apply_matrix(A, u);
    double adev = 0.0;
    for (int i = 0; i < basis.n_cells(); ++i) adev = std::max(adev, std::abs(Au.coeffs[i] - u.coeffs[i]));
    std::printf("average fixes mu* dev=%.3e\n", adev);

    // GL vs exact
    auto Agl = average_operator(m, basis, 0.7, 16, AverageMethod::GaussLegendre);
    ComplexMatrix D = Agl.mat;
    D -= A.mat;
    std::printf("GL16 vs exact: %.3e\n", tv_opnorm(D));
    auto Agl2 = average_operator(m, basis, 0.7, 32, AverageMethod::GaussLegendre);
    ComplexMatrix D2 = Agl2.mat;
    D2 -= Agl.mat;
    std::printf("GL32 vs GL16: %.3e\n", tv_opnorm(D2));

    // semigroup defect vs n_y refinement
    for (int g : {16, 32}) {
        auto bs = CellBasis::build(m, g, g);
        auto Ma = assemble_transfer(m, bs, 0.4);
        auto Mb = assemble_transfer(m, bs, 0.9);
        auto Mab = assemble_transfer(m, bs, 1.3);
        ComplexMatrix P = matmul(Mb.mat, Ma.mat);
        P -= Mab.mat;
        std::printf("grid %d: semigroup defect=%.4f\n", g, tv_opnorm(P));
    }

    // derivative ops on the perturbed model
    auto mp = doubling(true);
    auto bp = CellBasis::build(mp, 12, 12);
    auto ops = DerivativeOps::build(mp, bp);
    // D_X total mass is exactly zero; D_V telescopes to zero too
    auto r1 = random_measure(bp, 42);
    auto dxm = ops.dx.apply(r1);
    auto dvm = ops.dv.apply(r1);
    std::printf("perturbed cells=%d mass(Dx)=%.3e mass(Dv)=%.3e\n", bp.n_cells(),
                std::abs(mass_functional(dxm)), std::abs(mass_functional(dvm)));

    // constant density: D_V interior rows zero on the constant-roof model
    auto ops0 = DerivativeOps::build(m, basis);
    auto dv_u = ops0.dv.apply(u);
    double interior = 0.0, boundary = 0.0;
    for (int j = 0; j < basis.n_strips; ++j)
        for (int ix = 0; ix < basis.n_x; ++ix)
            for (int iy = 0; iy < basis.n_y; ++iy) {
                double v = std::abs(dv_u.coeffs[basis.index(j, ix, iy)]);
                bool edge = (j == 0 && ix == 0) || (j == basis.n_strips - 1 && ix == basis.n_x - 1);
                if (edge) boundary = std::max(boundary, v);
                else interior = std::max(interior, v);
            }
    std::printf("const density: D_V interior=%.3e boundary=%.6f (expect dens*edge=%.6f)\n",
                interior, boundary, (1.0 / basis.total_area) * basis.dc);

    // SBP, V direction: independent forward-difference oracle, eta vanishing
    // on edge-adjacent cells
    SplitMix64 rng(9);
    double worst_v = 0.0, worst_x = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<cplx> eta(bp.n_cells());
        for (auto& e : eta) e = cplx(rng.uniform(-1, 1), rng.uniform(-1, 1));
        for (int iy = 0; iy < bp.n_y; ++iy) {
            eta[bp.index(0, 0, iy)] = 0.0;
            eta[bp.index(bp.n_strips - 1, bp.n_x - 1, iy)] = 0.0;
        }
        auto mu = random_measure(bp, 100 + trial);
        // oracle: (U eta)_k = (eta_right - eta_k)/dist, 0 at the row end
        std::vector<cplx> ueta(bp.n_cells(), 0.0);
        for (int iy = 0; iy < bp.n_y; ++iy) {
            std::vector<int> row;
            for (int j = 0; j < bp.n_strips; ++j)
                for (int ix = 0; ix < bp.n_x; ++ix) row.push_back(bp.index(j, ix, iy));
            for (std::size_t k = 0; k + 1 < row.size(); ++k) {
                double d = 0.5 * (bp.dx[row[k] / (bp.n_x * bp.n_y)] +
                                  bp.dx[row[k + 1] / (bp.n_x * bp.n_y)]);
                ueta[row[k]] = (eta[row[k + 1]] - eta[row[k]]) / d;
            }
        }
        cplx lhs = pairing(mu, ueta);
        cplx rhs = -pairing(ops.dv.apply(mu), eta);
        worst_v = std::max(worst_v, std::abs(lhs - rhs));

        // X direction: oracle via the same fractions recomputed from scratch
        std::vector<cplx> xeta(bp.n_cells(), 0.0);
        for (int j = 0; j < bp.n_strips; ++j)
            for (int ix = 0; ix < bp.n_x; ++ix) {
                double dy = bp.dc * bp.col_rx[j * bp.n_x + ix];
                for (int iy = 0; iy + 1 < bp.n_y; ++iy)
                    xeta[bp.index(j, ix, iy)] =
                        (eta[bp.index(j, ix, iy + 1)] - eta[bp.index(j, ix, iy)]) / dy;
                Interval cx = bp.cell_x(j, ix);
                const auto& br = mp.base().branches()[j];
                double x_mid = cx.mid();
                double dyh = bp.dc * 0.5 * (mp.roof().eval(x_mid) + mp.roof().eval(br.map(x_mid)));
                cplx up = 0.0;
                int steps = 20000; // fine Riemann estimate of the landing average
                for (int sdx = 0; sdx < steps; ++sdx) {
                    double xs = cx.lo + cx.length() * (sdx + 0.5) / steps;
                    up += eta[bp.locate(br.map(xs), 0.0)];
                }
                up /= double(steps);
                xeta[bp.index(j, ix, bp.n_y - 1)] = (up - eta[bp.index(j, ix, bp.n_y - 1)]) / dyh;
            }
        cplx lhs_x = pairing(mu, xeta);
        cplx rhs_x = -pairing(ops.dx.apply(mu), eta);
        worst_x = std::max(worst_x, std::abs(lhs_x - rhs_x));
    }
    std::printf("SBP V residual=%.3e  X residual (Riemann oracle)=%.3e\n", worst_v, worst_x);

    // d_norm >= tv_norm
    double dn = d_norm(mp, bp, r1);
    std::printf("d_norm=%.4f tv=%.4f\n", dn, tv_norm(r1));
    return 0;
}
