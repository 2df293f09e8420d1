#include <cstdio>

#include "semigroup_spectra/common.hpp"
#include "semigroup_spectra/geometry.hpp"
#include "semigroup_spectra/linalg.hpp"
#include "semigroup_spectra/model.hpp"
#include "semigroup_spectra/poly.hpp"
#include "semigroup_spectra/threads.hpp"

using namespace sgs;

int main() {
    BranchedMap1D base({{{0.0, 0.5}, Polynomial({0.0, 2.0}), true},
                        {{0.5, 1.0}, Polynomial({-1.0, 2.0}), true}});
    RoofFunction roof({{{0.0, 0.5}, Polynomial({1.0})}, {{0.5, 1.0}, Polynomial({1.0})}});
    SuspensionModel m(std::move(base), std::move(roof), std::log(2.0), 0.1);

    auto rep = validate_atlas(m.atlas(), 32, 0);
    std::printf("structural_ok=%d pass=%d orient=%d\n", int(rep.structurally_ok()), int(rep.pass()),
                int(rep.orientation_consistent));
    for (const auto& ax : rep.axioms)
        if (!ax.pass)
            std::printf("axiom %d FAILS: %s (chart %d at %.4f,%.4f)\n", ax.axiom,
                        ax.witness ? ax.witness->note.c_str() : "", ax.witness ? ax.witness->chart : -1,
                        ax.witness ? ax.witness->x : 0.0, ax.witness ? ax.witness->y : 0.0);

    SurfacePoint p{0, 0.3, 0.2, 0};
    auto q = flow(m, p, 1.0);
    std::printf("flow(0.3,0.2;1) -> chart %d sheet %d (%.6f, %.6f)\n", q.chart, q.sheet, q.x, q.y);

    auto js = jacobian_split(m, p, 3.0);
    std::printf("a_3 = %.9f b_3 = %.3e valid=%d\n", js.a_t, js.b_t, int(js.valid));

    auto cls = classify_point(m.atlas(), SurfacePoint{0, 0.25, 0.5, 0});
    std::printf("classify strip mid: %s\n", cls == PointClass::Interior ? "interior" : "boundary");
    auto cls2 = classify_point(m.atlas(), SurfacePoint{2, 0.0, 0.1, 2});
    std::printf("classify x=0 edge: %s\n", cls2 == PointClass::Interior ? "interior" : "boundary");

    Leaf lf = leaf_through(m.atlas(), SurfacePoint{0, 0.3, 0.5, 0});
    std::printf("leaf through (0.3,0.5): len=%.6f pts=%zu\n", lf.length, lf.polyline.size());

    ExpansionReport er = verify_expansion(m, 64, {1, 2, 3, 4, 5, 6});
    std::printf("lambda_hat=%.6f C=%.3f sup_b=%.3e pass=%d invalid=%d\n", er.lambda_hat, er.c_hat,
                er.sup_b, int(er.pass), er.invalid_samples);

    ComplexMatrix A(3, 3);
    A(0, 0) = 2.0; A(1, 1) = cplx(0, 1); A(2, 2) = 0.5; A(0, 2) = 1.0;
    auto e = eig(A);
    std::printf("eig: (%.3f,%.3f) (%.3f,%.3f) (%.3f,%.3f)\n", e.values[0].real(),
                e.values[0].imag(), e.values[1].real(), e.values[1].imag(), e.values[2].real(),
                e.values[2].imag());
    auto lu = lu_factor(A);
    std::vector<cplx> b{1.0, 2.0, 3.0};
    auto xs = lu.solve(b);
    std::printf("solve: %.4f %.4f %.4f\n", xs[0].real(), xs[1].real(), xs[2].real());
    return 0;
}
