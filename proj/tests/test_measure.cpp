#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "semigroup_spectra/measure.hpp"
#include "support.hpp"

using namespace sgs;
using Catch::Approx;

namespace {

double max_colsum_dev(const ComplexMatrix& a, cplx expected) {
    double worst = 0.0;
    for (int j = 0; j < a.cols(); ++j) {
        cplx s = 0.0;
        for (int i = 0; i < a.rows(); ++i) s += a(i, j);
        worst = std::max(worst, std::abs(s - expected));
    }
    return worst;
}

} // namespace

TEST_CASE("cell basis shape and tags") {
    auto mc = fixtures::doubling_const();
    CellBasis bc = CellBasis::build(mc, 8, 8);
    CHECK(bc.tag == "nx8ny8");
    CHECK(bc.n_cells() == 2 * 8 * 8);
    CHECK(bc.total_area == Approx(1.0));

    auto mp = fixtures::doubling_perturbed();
    CellBasis bp = CellBasis::build(mp, 12, 24);
    // n_y picks up the roof maximum so cells stay near-square in height
    CHECK(bp.tag == "nx12ny31");
    CHECK(bp.n_cells() == 744);

    CHECK_THROWS_AS(CellBasis::build(mc, 0, 8), input_error);
}

TEST_CASE("locate returns the cell whose center it is given") {
    auto m = fixtures::doubling_perturbed();
    CellBasis b = CellBasis::build(m, 4, 4);
    for (int j = 0; j < b.n_strips; ++j)
        for (int ix = 0; ix < b.n_x; ++ix)
            for (int iy = 0; iy < b.n_y; ++iy) {
                double x = b.cell_x(j, ix).mid();
                double c = b.cell_c(iy).mid();
                CHECK(b.locate(x, c) == b.index(j, ix, iy));
            }
}

TEST_CASE("occupation times of an itinerary add up to the horizon") {
    auto m = fixtures::doubling_perturbed();
    CellBasis b = CellBasis::build(m, 6, 6);
    for (double x : {0.13, 0.77}) {
        for (double T : {0.4, 2.3}) {
            double total = 0.0;
            cell_itinerary(m, b, x, 0.37, T, [&](int cell, double t0, double t1) {
                CHECK(cell >= 0);
                CHECK(cell < b.n_cells());
                CHECK(t1 >= t0);
                total += t1 - t0;
            });
            CHECK(total == Approx(T).margin(1e-10));
        }
    }
}

TEST_CASE("transfer at time zero is the identity") {
    auto m = fixtures::doubling_const();
    CellBasis b = CellBasis::build(m, 4, 4);
    OperatorMatrix M = assemble_transfer(m, b, 0.0);
    ComplexMatrix I = ComplexMatrix::identity(b.n_cells());
    I -= M.mat;
    CHECK(tv_opnorm(I) == 0.0);
    CHECK_THROWS_AS(assemble_transfer(m, b, -0.5), input_error);
}

TEST_CASE("one-return transfer of the doubling suspension, by hand") {
    auto m = fixtures::doubling_const();
    CellBasis b = CellBasis::build(m, 2, 1);
    REQUIRE(b.n_cells() == 4);
    OperatorMatrix M = assemble_transfer(m, b, 1.0);
    // cells: strip 0 holds [0,1/4),[1/4,1/2), strip 1 holds [1/2,3/4),[3/4,1).
    // After one return each source column splits evenly onto the two cells of
    // its image half: [0,1/4) -> [0,1/2), etc. All splits are dyadic, so the
    // subcell sampling places every deposit exactly.
    int s00 = b.index(0, 0, 0), s01 = b.index(0, 1, 0);
    int s10 = b.index(1, 0, 0), s11 = b.index(1, 1, 0);
    ComplexMatrix want(4, 4);
    want(s00, s00) = want(s01, s00) = 0.5;
    want(s10, s01) = want(s11, s01) = 0.5;
    want(s00, s10) = want(s01, s10) = 0.5;
    want(s10, s11) = want(s11, s11) = 0.5;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            CHECK(std::abs(M.mat(i, j) - want(i, j)) <= 1e-15);
}

TEST_CASE("assembled transfers conserve mass exactly") {
    for (auto m : {fixtures::doubling_const(), fixtures::doubling_perturbed()}) {
        CellBasis b = CellBasis::build(m, 6, 6);
        for (double t : {0.3, 1.0, std::sqrt(2.0)}) {
            OperatorMatrix M = assemble_transfer(m, b, t);
            CHECK(max_colsum_dev(M.mat, cplx(1.0, 0.0)) <= 1e-15);
            CHECK(tv_opnorm(M.mat) == Approx(1.0).margin(1e-12));

            DiscreteMeasure mu = random_measure(b, 17);
            DiscreteMeasure Mmu = apply_matrix(M, mu);
            CHECK(std::abs(mass_functional(Mmu) - mass_functional(mu)) <= 1e-12);
            CHECK(tv_norm(Mmu) <= tv_norm(mu) + 1e-12);
        }
    }
}

TEST_CASE("time averaging conserves mass and refines with the quadrature") {
    auto m = fixtures::doubling_const();
    CellBasis b = CellBasis::build(m, 8, 8);
    double s = 1.0;
    OperatorMatrix exact = average_operator(m, b, s);
    CHECK(max_colsum_dev(exact.mat, cplx(1.0, 0.0)) <= 1e-12);

    // the point-sampled Gauss-Legendre path sees a piecewise-constant
    // integrand, so it carries an error floor; more nodes still help early
    OperatorMatrix gl16 = average_operator(m, b, s, 16, AverageMethod::GaussLegendre);
    OperatorMatrix gl48 = average_operator(m, b, s, 48, AverageMethod::GaussLegendre);
    ComplexMatrix d16 = gl16.mat;
    d16 -= exact.mat;
    ComplexMatrix d48 = gl48.mat;
    d48 -= exact.mat;
    CHECK(tv_opnorm(d48) < tv_opnorm(d16));

    CHECK_THROWS_AS(average_operator(m, b, 0.0), input_error);
}

TEST_CASE("sparse derivative stencils match their dense form") {
    auto m = fixtures::doubling_const();
    CellBasis b = CellBasis::build(m, 6, 6);
    int n = b.n_cells();
    DiscreteMeasure mu = random_measure(b, 5);
    for (const SparseOp& op : {leaf_derivative_op(b), flow_derivative_op(m, b)}) {
        std::vector<double> dense = op.to_dense();
        DiscreteMeasure sparse_out = op.apply(mu);
        for (int i = 0; i < n; ++i) {
            cplx want = 0.0;
            for (int j = 0; j < n; ++j) want += dense[std::size_t(j) * n + i] * mu.coeffs[j];
            CHECK(std::abs(sparse_out.coeffs[i] - want) <= 1e-12);
        }
    }
}

TEST_CASE("derivative stencil rows are mass-free") {
    auto m = fixtures::doubling_perturbed();
    CellBasis b = CellBasis::build(m, 5, 4);
    // summation by parts: the total signed weight attached to each source
    // cell vanishes, so constants are annihilated in the adjoint direction
    for (const SparseOp& op : {leaf_derivative_op(b), flow_derivative_op(m, b)}) {
        std::vector<double> colsum(b.n_cells(), 0.0);
        for (int i = 0; i < op.n; ++i)
            for (const auto& [j, w] : op.rows[i]) colsum[j] += w;
        for (int j = 0; j < b.n_cells(); ++j) CHECK(std::abs(colsum[j]) <= 1e-9);
    }
}

TEST_CASE("strong norm dominates total variation and is homogeneous") {
    auto m = fixtures::doubling_const();
    CellBasis b = CellBasis::build(m, 6, 6);
    DerivativeOps ops = DerivativeOps::build(m, b);
    for (std::uint64_t seed : {3u, 4u, 5u}) {
        DiscreteMeasure mu = random_measure(b, seed);
        double dn = d_norm(mu, ops);
        CHECK(dn >= tv_norm(mu));
        DiscreteMeasure mu2 = mu;
        for (auto& c : mu2.coeffs) c *= 2.0;
        CHECK(d_norm(mu2, ops) == Approx(2.0 * dn).epsilon(1e-12));
    }
    DiscreteMeasure uni = uniform_measure(b);
    CHECK(std::abs(mass_functional(uni) - 1.0) <= 1e-12);
    CHECK(d_norm(m, b, uni) >= tv_norm(uni));
}

TEST_CASE("measures are validated against the basis they claim") {
    auto m = fixtures::doubling_const();
    CellBasis b = CellBasis::build(m, 6, 6);
    DiscreteMeasure wrong{b.tag, std::vector<cplx>(3)};
    CHECK_THROWS_AS(check_basis(wrong, b), input_error);
}
