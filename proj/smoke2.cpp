#include <cstdio>

#include "semigroup_spectra/model.hpp"

using namespace sgs;

static SuspensionModel perturbed() {
    BranchedMap1D base({{{0.0, 0.5}, Polynomial({0.0, 2.0}), true},
                        {{0.5, 1.0}, Polynomial({-1.0, 2.0}), true}});
    Polynomial bump({1.0, 3.117691453623979, -9.353074360871937, 6.235382907247958});
    RoofFunction roof({{{0.0, 0.5}, bump}, {{0.5, 1.0}, bump}});
    return SuspensionModel(std::move(base), std::move(roof), std::log(2.0), 0.1);
}

int main() {
    auto m = perturbed();
    std::printf("r_min=%.6f r_max=%.6f int r=%.12f\n", m.roof().r_min(), m.roof().r_max(),
                m.roof().integral(0, 1));
    auto rep = validate_atlas(m.atlas(), 32, 0);
    std::printf("atlas pass=%d orient=%d\n", int(rep.pass()), int(rep.orientation_consistent));
    for (const auto& ax : rep.axioms)
        if (!ax.pass) std::printf("axiom %d FAILS %s\n", ax.axiom, ax.witness ? ax.witness->note.c_str() : "");

    // cocycle: split(t+s,p) = split(t,p) * split(s, phi^t p) as lower-triangular 2x2
    SplitMix64 rng(7);
    double worst = 0.0;
    int invalid = 0;
    for (int k = 0; k < 200; ++k) {
        SuspensionModel::Coords q{rng.uniform(), rng.uniform()};
        double t = rng.uniform(0.1, 3.0), s = rng.uniform(0.1, 3.0);
        SurfacePoint p = m.from_coords(q);
        auto full = jacobian_split(m, p, t + s);
        auto first = jacobian_split(m, p, t);
        auto second = jacobian_split(m, flow(m, p, t), s);
        if (!full.valid || !first.valid || !second.valid) { ++invalid; continue; }
        double a = first.a_t * second.a_t;
        double b = first.b_t * second.a_t + second.b_t;
        worst = std::max(worst, std::max(std::abs(a - full.a_t), std::abs(b - full.b_t)));
    }
    std::printf("cocycle worst=%.3e invalid=%d\n", worst, invalid);

    auto er = verify_expansion(m, 200, {1, 2, 3, 4, 5, 6, 7, 8});
    std::printf("lambda_hat=%.6f C=%.4f sup_b=%.4f pass=%d\n", er.lambda_hat, er.c_hat, er.sup_b,
                int(er.pass));

    // section round-trip: flowing (x,0) by r(x) lands exactly on (f(x), 0)
    double dev = 0.0;
    for (int k = 0; k < 50; ++k) {
        double x = rng.uniform();
        auto q2 = flow_coords(m, {x, 0.0}, m.roof().eval(x));
        dev = std::max(dev, std::abs(q2.x - m.base().eval(x)) + std::abs(q2.c));
    }
    std::printf("section round-trip dev=%.3e\n", dev);

    // semigroup: phi^{t+s} vs phi^s(phi^t)
    double sg = 0.0;
    for (int k = 0; k < 200; ++k) {
        SuspensionModel::Coords q{rng.uniform(), rng.uniform()};
        double t = rng.uniform(0.0, 4.0), s = rng.uniform(0.0, 4.0);
        auto a = flow_coords(m, q, t + s);
        auto b = flow_coords(m, flow_coords(m, q, t), s);
        sg = std::max(sg, std::abs(a.x - b.x) + std::abs(a.c - b.c));
    }
    std::printf("semigroup dev=%.3e\n", sg);
    return 0;
}
