#include <chrono>
#include <cstdio>

#include "semigroup_spectra/spectra.hpp"

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
    auto t0 = std::chrono::steady_clock::now();
    CellBasis b = CellBasis::build(m, 4, 512);
    GeneratorMatrix gen = build_generator(m, b, {});
    double tg = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("generator built n=%d [%.0fs]\n", b.n_cells(), tg);
    ResolventEvaluator ev = ResolventEvaluator::build(gen);
    double ts = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("schur done [%.0fs]\n", ts);
    auto poles = pole_scan(ev, Strip{-2.0, 1.0, 14.0});
    for (int k = 0; k <= 2; ++k) {
        cplx target(0.0, 2.0 * kPi * k);
        double best = 1e9;
        cplx at;
        for (const auto& p : poles)
            if (std::abs(p.location - target) < best) {
                best = std::abs(p.location - target);
                at = p.location;
            }
        std::printf("k=%d err %.4e at (%.6f, %.6f)\n", k, best, at.real(), at.imag());
    }
    double te = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("total [%.0fs], %zu poles\n", te, poles.size());
    return 0;
}
