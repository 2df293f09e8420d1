#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "semigroup_spectra/model.hpp"
#include "support.hpp"

using namespace sgs;
using Catch::Approx;

TEST_CASE("base map construction rejects bad branch data") {
    // non-monotone branch: derivative of x + 4x(1-x)... use 4x(1-x), turns at 1/2
    std::vector<Branch> nonmono;
    nonmono.push_back({{0.0, 1.0}, Polynomial{{0.0, 4.0, -4.0}}, true});
    CHECK_THROWS_AS(BranchedMap1D(nonmono), input_error);

    std::vector<Branch> partial;
    partial.push_back({{0.0, 0.5}, Polynomial{{0.0, 2.0}}, true});
    partial.push_back({{0.5, 1.0}, Polynomial{{-0.35, 1.2}}, true}); // image [0.25, 0.85]
    CHECK_THROWS_WITH(BranchedMap1D(partial),
                      Catch::Matchers::ContainsSubstring("partial branches"));

    std::vector<Branch> flagged;
    flagged.push_back({{0.0, 0.5}, Polynomial{{0.0, 2.0}}, false});
    flagged.push_back({{0.5, 1.0}, Polynomial{{-1.0, 2.0}}, true});
    CHECK_THROWS_WITH(BranchedMap1D(flagged),
                      Catch::Matchers::ContainsSubstring("partial branches"));

    std::vector<Branch> gap;
    gap.push_back({{0.0, 0.4}, Polynomial{{0.0, 2.5}}, true});
    gap.push_back({{0.5, 1.0}, Polynomial{{-1.0, 2.0}}, true});
    CHECK_THROWS_AS(BranchedMap1D(gap), input_error);
}

TEST_CASE("roof construction rejects nonpositive or misaligned data") {
    std::vector<RoofPiece> neg;
    neg.push_back({{0.0, 1.0}, Polynomial{{0.2, -0.5}}}); // hits zero inside
    CHECK_THROWS_AS(RoofFunction(neg), input_error);

    std::vector<RoofPiece> deg5;
    deg5.push_back({{0.0, 1.0}, Polynomial{{1.0, 0.0, 0.0, 0.0, 0.0, 0.1}}});
    CHECK_THROWS_AS(RoofFunction(deg5), input_error);

    // roof pieces that do not line up with the branch intervals
    std::vector<Branch> br;
    br.push_back({{0.0, 0.5}, Polynomial{{0.0, 2.0}}, true});
    br.push_back({{0.5, 1.0}, Polynomial{{-1.0, 2.0}}, true});
    std::vector<RoofPiece> whole;
    whole.push_back({{0.0, 1.0}, Polynomial::constant(1.0)});
    CHECK_THROWS_AS(SuspensionModel(BranchedMap1D(br), RoofFunction(whole), std::log(2.0), 0.1),
                    input_error);
}

TEST_CASE("discontinuous roof across the branch line is rejected") {
    std::vector<Branch> br;
    br.push_back({{0.0, 0.5}, Polynomial{{0.0, 2.0}}, true});
    br.push_back({{0.5, 1.0}, Polynomial{{-1.0, 2.0}}, true});
    std::vector<RoofPiece> rp;
    rp.push_back({{0.0, 0.5}, Polynomial::constant(1.0)});
    rp.push_back({{0.5, 1.0}, Polynomial::constant(1.2)});
    CHECK_THROWS_AS(SuspensionModel(BranchedMap1D(br), RoofFunction(rp), std::log(2.0), 0.1),
                    input_error);
}

TEST_CASE("bundled models expose the expected roof ranges") {
    auto mc = fixtures::doubling_const();
    CHECK(mc.roof().r_min() == 1.0);
    CHECK(mc.roof().r_max() == 1.0);
    auto mp = fixtures::doubling_perturbed();
    CHECK(mp.roof().r_max() == Approx(1.3).margin(1e-6));
    CHECK(mp.roof().r_min() == Approx(0.7).margin(1e-6));
    CHECK(mp.roof().eval(0.0) == Approx(1.0));
    CHECK(mp.roof().eval(1.0) == Approx(1.0));
}

TEST_CASE("flow rises at rate 1/r and folds through the roof") {
    auto m = fixtures::doubling_const();
    auto q = flow_coords(m, {0.3, 0.4}, 0.25);
    CHECK(q.x == Approx(0.3));
    CHECK(q.c == Approx(0.65));

    auto f = flow_coords(m, {0.3, 0.9}, 0.3);
    CHECK(f.x == Approx(0.6));
    CHECK(f.c == Approx(0.2));

    // left branch wins at the shared endpoint
    CHECK(m.base().eval(0.5) == 1.0);

    auto mp = fixtures::doubling_perturbed();
    double r = mp.roof().eval(0.3);
    auto qp = flow_coords(mp, {0.3, 0.1}, 0.05);
    CHECK(qp.x == Approx(0.3));
    CHECK(qp.c == Approx(0.1 + 0.05 / r).epsilon(1e-12));

    CHECK_THROWS_AS(flow_coords(m, {0.3, 0.1}, -1.0), input_error);
}

TEST_CASE("surface point round trip through suspension coordinates") {
    auto m = fixtures::doubling_perturbed();
    for (double x : {0.12, 0.42, 0.57, 0.93}) {
        for (double c : {0.05, 0.3, 0.7, 0.95}) {
            SurfacePoint p = m.from_coords({x, c});
            auto q = m.to_coords(p);
            CHECK(q.x == Approx(x).margin(1e-10));
            CHECK(q.c == Approx(c).margin(1e-10));
        }
    }
}

TEST_CASE("time map derivative satisfies the cocycle law") {
    auto m = fixtures::doubling_perturbed();
    struct Case {
        double x, c, t, s;
    };
    for (auto [x, c, t, s] : {Case{0.3, 0.2, 0.4, 0.7}, Case{0.62, 0.55, 0.9, 0.35},
                              Case{0.17, 0.66, 1.3, 0.6}}) {
        SurfacePoint p = m.from_coords({x, c});
        SurfacePoint q = flow(m, p, t);
        JacobianSplit jt = jacobian_split(m, p, t);
        JacobianSplit js = jacobian_split(m, q, s);
        JacobianSplit jts = jacobian_split(m, p, t + s);
        REQUIRE(jt.valid);
        REQUIRE(js.valid);
        REQUIRE(jts.valid);
        CHECK(jts.a_t == Approx(jt.a_t * js.a_t).epsilon(1e-9));
        CHECK(jts.b_t == Approx(js.b_t + js.a_t * jt.b_t).margin(1e-9));
    }
}

TEST_CASE("measured expansion rate matches the doubling rate") {
    auto mc = fixtures::doubling_const();
    ExpansionReport rc = verify_expansion(mc, 200, {1.0, 2.0, 3.0, 4.0});
    // constant roof: the leaf contraction is exactly 2^{-t} at integer t, so
    // the fitted rate is ln 2 to roundoff and the shear vanishes identically
    CHECK(rc.lambda_hat == Approx(std::log(2.0)).margin(1e-12));
    CHECK(rc.c_hat == Approx(1.0).margin(1e-12));
    CHECK(rc.sup_b == 0.0);
    CHECK(rc.pass);

    auto mp = fixtures::doubling_perturbed();
    ExpansionReport rp = verify_expansion(mp, 200, {1.0, 2.0, 3.0, 4.0});
    CHECK(rp.lambda_hat == Approx(0.54098277979937248).margin(1e-9));
    CHECK(rp.pass);
    CHECK(rp.sup_b > 0.0);
    CHECK(rp.invalid_samples == 0);
}

TEST_CASE("the section return map is the base map") {
    auto m = fixtures::doubling_const();
    CHECK(poincare_section(m).eval(0.3) == Approx(0.6));
    CHECK(poincare_section(m).eval(0.75) == Approx(0.5));
}
