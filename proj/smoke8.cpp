#include <chrono>
#include <cstdio>

#include "semigroup_spectra/laplace.hpp"

using namespace sgs;

static SuspensionModel doubling_const() {
    std::vector<Branch> br;
    br.push_back({{0.0, 0.5}, Polynomial{{0.0, 2.0}}, true});
    br.push_back({{0.5, 1.0}, Polynomial{{-1.0, 2.0}}, true});
    BranchedMap1D base(br);
    std::vector<RoofPiece> rp;
    rp.push_back({{0.0, 0.5}, Polynomial::constant(1.0)});
    rp.push_back({{0.5, 1.0}, Polynomial::constant(1.0)});
    RoofFunction roof(rp);
    return SuspensionModel(std::move(base), std::move(roof), std::log(2.0), 0.1);
}

int main() {
    SuspensionModel m = doubling_const();

    // A: decomposition check at 16x16: bromwich limit == family semigroup?
    {
        CellBasis b = CellBasis::build(m, 16, 16);
        WeakNorm wn = WeakNorm::build(m, b);
        GeneratorMatrix gen = build_generator(m, b, {});
        ResolventEvaluator ev = ResolventEvaluator::build(gen);
        InversionConfig cfg;
        cfg.k_ladder = {200.0};
        auto step = bromwich_ladder(m, b, ev, wn, cfg).back();
        OperatorMatrix fam = family_semigroup(ev, 1.0);
        OperatorMatrix ref = assemble_transfer(m, b, 1.0);
        ComplexMatrix d1 = step.approximant.mat;
        d1.axpy(cplx(-1.0, 0.0), fam.mat);
        ComplexMatrix d2 = fam.mat;
        d2.axpy(cplx(-1.0, 0.0), ref.mat);
        std::printf("A weak(bromwich - famsg) %.5e  weak(famsg - M) %.5e  weak(bromwich - M) %.5e"
                    "  tail %.5e\n",
                    wn(d1), wn(d2), step.weak_error, step.tail_budget);
    }

    // B: pole location error vs ny (const roof, poles at 2 pi i k)
    for (int ny : {32, 64, 128, 256}) {
        auto t0 = std::chrono::steady_clock::now();
        CellBasis b = CellBasis::build(m, 4, ny);
        GeneratorMatrix gen = build_generator(m, b, {});
        ResolventEvaluator ev = ResolventEvaluator::build(gen);
        Strip strip{-2.0, 1.0, 14.0};
        auto poles = pole_scan(ev, strip);
        double el = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("B ny=%3d (n=%4d) [%.0fs]:", ny, b.n_cells(), el);
        for (int k = 0; k <= 2; ++k) {
            cplx target(0.0, 2.0 * kPi * k);
            double best = 1e9;
            for (const auto& p : poles) best = std::min(best, std::abs(p.location - target));
            std::printf("  k=%d err %.3e", k, best);
        }
        std::printf("  (%zu poles)\n", poles.size());
    }
    return 0;
}
