#include <catch2/catch_amalgamated.hpp>

#include "semigroup_spectra/geometry.hpp"
#include "support.hpp"

using namespace sgs;

TEST_CASE("polynomial evaluation, derivative, and integral") {
    Polynomial p{{2.0, 3.0, 0.0, -1.0}}; // 2 + 3x - x^3
    CHECK(p(0.0) == 2.0);
    CHECK(p(2.0) == Catch::Approx(0.0).margin(1e-15));
    CHECK(p.derivative()(2.0) == Catch::Approx(-9.0));
    CHECK(p.integral(0.0, 2.0) == Catch::Approx(6.0));
    CHECK(Polynomial::constant(4.0)(0.37) == 4.0);
}

TEST_CASE("induced atlases of the bundled models pass validation") {
    for (auto model : {fixtures::doubling_const(), fixtures::doubling_perturbed()}) {
        ValidationReport rep = validate_atlas(model.atlas());
        CHECK(rep.structurally_ok());
        CHECK(rep.orientation_consistent);
        for (const auto& a : rep.axioms) {
            INFO("axiom " << a.axiom);
            CHECK(a.pass);
        }
        CHECK(rep.pass());
    }
}

TEST_CASE("corrupted transition data is rejected with a witness") {
    BranchedSurfaceAtlas atlas = fixtures::doubling_const().atlas();
    REQUIRE_FALSE(atlas.transitions.empty());
    // Skewing one coordinate change breaks consistency on the overlap it serves.
    atlas.transitions.front().x_map.p = Polynomial{{0.013, 1.02}};
    ValidationReport rep = validate_atlas(atlas);
    CHECK_FALSE(rep.pass());
    bool witnessed = false;
    for (const auto& a : rep.axioms)
        if (!a.pass && a.witness) witnessed = true;
    CHECK(witnessed);
}

TEST_CASE("dangling chart references are a structural error") {
    BranchedSurfaceAtlas atlas = fixtures::doubling_const().atlas();
    atlas.transitions.front().to_chart = 99;
    ValidationReport rep = validate_atlas(atlas);
    CHECK_FALSE(rep.structurally_ok());
    CHECK_FALSE(rep.structural_errors.empty());
    CHECK_FALSE(rep.pass());
}

TEST_CASE("disk test separates interior points from the image boundary") {
    BranchedSurfaceAtlas atlas;
    atlas.charts.push_back({0, {{0.0, 1.0}, {0.0, 1.0}}});
    atlas.subcharts.push_back({0, 0, {{{0.0, 1.0}, {0.0, 1.0}}}});
    atlas.classify_radius = 0.01;

    SurfacePoint mid{0, 0.5, 0.5, 0};
    SurfacePoint edge{0, 0.005, 0.5, 0};
    CHECK(classify_point(atlas, mid) == PointClass::Interior);
    CHECK(classify_point(atlas, edge) == PointClass::Boundary);
}

TEST_CASE("canonical representative is stable under repetition") {
    BranchedSurfaceAtlas atlas = fixtures::doubling_const().atlas();
    for (double x : {0.1, 0.3, 0.45}) {
        SurfacePoint p{atlas.charts.front().id, x, 0.5, atlas.subcharts.front().id};
        SurfacePoint c1 = canonicalize(atlas, p);
        SurfacePoint c2 = canonicalize(atlas, c1);
        CHECK(c1.chart == c2.chart);
        CHECK(c1.sheet == c2.sheet);
        CHECK(c1.x == Catch::Approx(c2.x).margin(1e-12));
        CHECK(c1.y == Catch::Approx(c2.y).margin(1e-12));
    }
}

TEST_CASE("interior points of the suspension admit a full disk") {
    BranchedSurfaceAtlas atlas = fixtures::doubling_const().atlas();
    SurfacePoint p{atlas.charts.front().id, 0.25, 0.5, atlas.subcharts.front().id};
    CHECK(classify_point(atlas, p) == PointClass::Interior);
}
