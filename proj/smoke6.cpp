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

static SuspensionModel doubling_perturbed() {
    std::vector<Branch> br;
    br.push_back({{0.0, 0.5}, Polynomial{{0.0, 2.0}}, true});
    br.push_back({{0.5, 1.0}, Polynomial{{-1.0, 2.0}}, true});
    BranchedMap1D base(br);
    Polynomial cubic{{1.0, 3.117691453623979, -9.353074360871937, 6.235382907247958}};
    std::vector<RoofPiece> rp;
    rp.push_back({{0.0, 0.5}, cubic});
    rp.push_back({{0.5, 1.0}, cubic});
    RoofFunction roof(rp);
    return SuspensionModel(std::move(base), std::move(roof), 0.55, 0.1);
}

int main() {
    auto t0 = std::chrono::steady_clock::now();
    auto lap = [&] {
        auto t1 = std::chrono::steady_clock::now();
        double s = std::chrono::duration<double>(t1 - t0).count();
        t0 = t1;
        return s;
    };

    // A: scalar quadrature oracle
    for (double k : {25.0, 50.0, 100.0, 200.0})
        std::printf("A scalar probe k=%5.0f err %.4e\n", k, bromwich_scalar_probe(1.0, 1.0, k));

    SuspensionModel m = doubling_const();
    CellBasis b12 = CellBasis::build(m, 12, 12);
    WeakNorm wn = WeakNorm::build(m, b12);
    std::printf("[%6.2fs] weak-norm built n=%d\n", lap(), wn.n);

    // B: structural checks
    ComplexMatrix zero(wn.n, wn.n);
    ComplexMatrix id = ComplexMatrix::identity(wn.n);
    std::printf("B weak(0) %.3e  weak(I) %.6f (<=1)\n", wn(zero), wn(id));
    SplitMix64 rng(7);
    for (int r = 0; r < 3; ++r) {
        ComplexMatrix a(wn.n, wn.n);
        for (int j = 0; j < wn.n; ++j)
            for (int i = 0; i < wn.n; ++i) a(i, j) = cplx(rng.uniform() - 0.5, rng.uniform() - 0.5);
        double w = wn(a), tv = tv_opnorm(a);
        std::printf("B sandwich %d: weak %.6f tv %.6f ratio %.3f %s\n", r, w, tv, w / tv,
                    w <= tv ? "ok" : "VIOLATION");
    }

    // C: generator scale (1/t)||M(t)-I||_{D->TV} across t, two grids
    for (int g : {12, 16}) {
        CellBasis bg = CellBasis::build(m, g, g);
        WeakNorm wng = (g == 12) ? wn : WeakNorm::build(m, bg);
        std::printf("C grid %2d:", g);
        for (double t : {0.05, 0.1, 0.2, 0.5, 1.0}) {
            OperatorMatrix mt = assemble_transfer(m, bg, t);
            ComplexMatrix d = mt.mat;
            d.axpy(cplx(-1.0, 0.0), ComplexMatrix::identity(bg.n_cells()));
            std::printf("  t=%.2f %.4f", t, wng(d) / t);
        }
        std::printf("\n");
    }
    std::printf("[%6.2fs] C done\n", lap());

    // D: mini Bromwich ladder, const roof 12x12
    GeneratorMatrix gen = build_generator(m, b12, {});
    ResolventEvaluator ev = ResolventEvaluator::build(gen);
    std::printf("[%6.2fs] evaluator built\n", lap());
    InversionConfig cfg;
    auto steps = bromwich_ladder(m, b12, ev, wn, cfg);
    std::printf("[%6.2fs] ladder done\n", lap());
    for (const auto& s : steps)
        std::printf("D k=%6.1f nodes %4d weak %.5e tv %.5e budget %.5e (10x: %.3e)\n", s.k,
                    s.nodes_used, s.weak_error, s.tv_error, s.tail_budget, 10 * s.tail_budget);

    // F: node refinement at fixed k: is the k=200 floor trapezoid error?
    for (int mult : {2, 4}) {
        InversionConfig fine = cfg;
        fine.k_ladder = {200.0};
        fine.n_nodes = 2 * 511 * mult;
        auto fs = bromwich_ladder(m, b12, ev, wn, fine);
        std::printf("F nodes x%d: weak %.5e tv %.5e\n", mult, fs.back().weak_error,
                    fs.back().tv_error);
    }
    std::printf("[%6.2fs] F done\n", lap());

    // G: family floor, transfer operators only: weak(M(t/2)^2 - M(t))
    for (int g : {12, 16}) {
        CellBasis bg = CellBasis::build(m, g, g);
        WeakNorm wng = (g == 12) ? wn : WeakNorm::build(m, bg);
        OperatorMatrix mh = assemble_transfer(m, bg, 0.5);
        OperatorMatrix mf = assemble_transfer(m, bg, 1.0);
        ComplexMatrix sq = matmul(mh.mat, mh.mat);
        sq.axpy(cplx(-1.0, 0.0), mf.mat);
        std::printf("G grid %2d family floor: weak %.5e tv %.5e\n", g, wng(sq), tv_opnorm(sq));
    }
    std::printf("[%6.2fs] G done\n", lap());

    // H: abscissa robustness a in {0.5, 1, 2}
    {
        std::vector<InversionStep> by_a;
        for (double a : {0.5, 1.0, 2.0}) {
            InversionConfig ca = cfg;
            ca.a = a;
            by_a.push_back(bromwich_invert(m, b12, ev, wn, ca));
            std::printf("H a=%.1f weak_err %.5e budget %.5e\n", a, by_a.back().weak_error,
                        by_a.back().tail_budget);
        }
        for (int i = 0; i < 3; ++i)
            for (int j = i + 1; j < 3; ++j) {
                ComplexMatrix d = by_a[i].approximant.mat;
                d.axpy(cplx(-1.0, 0.0), by_a[j].approximant.mat);
                std::printf("H pair %d-%d weak dist %.5e\n", i, j, wn(d));
            }
    }
    std::printf("[%6.2fs] H done\n", lap());

    // E: same ladder on the perturbed roof (smaller grid)
    SuspensionModel mp = doubling_perturbed();
    CellBasis bp = CellBasis::build(mp, 10, 10);
    WeakNorm wnp = WeakNorm::build(mp, bp);
    GeneratorMatrix genp = build_generator(mp, bp, {});
    ResolventEvaluator evp = ResolventEvaluator::build(genp);
    auto stepsp = bromwich_ladder(mp, bp, evp, wnp, cfg);
    std::printf("[%6.2fs] perturbed ladder done n=%d\n", lap(), bp.n_cells());
    for (const auto& s : stepsp)
        std::printf("E k=%6.1f weak %.5e tv %.5e budget %.5e\n", s.k, s.weak_error, s.tv_error,
                    s.tail_budget);
    return 0;
}
