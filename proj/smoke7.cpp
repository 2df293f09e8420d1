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
    InversionConfig cfg;
    cfg.k_ladder = {200.0};
    const std::pair<int, int> grids[] = {{8, 16}, {8, 32}, {16, 32}, {8, 64}, {12, 12}, {8, 128}};
    for (auto [nx, ny] : grids) {
        auto t0 = std::chrono::steady_clock::now();
        CellBasis b = CellBasis::build(m, nx, ny);
        WeakNorm wn = WeakNorm::build(m, b);
        GeneratorMatrix gen = build_generator(m, b, {});
        ResolventEvaluator ev = ResolventEvaluator::build(gen);
        auto steps = bromwich_ladder(m, b, ev, wn, cfg);
        double el = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("nx=%3d ny=%3d cells %5d: weak floor %.5e tv %.5e tail %.5e  [%.1fs]\n", nx,
                    ny, b.n_cells(), steps.back().weak_error, steps.back().tv_error,
                    steps.back().tail_budget, el);
    }
    return 0;
}
