#include <cstdio>
#include <semigroup_spectra/spectra.hpp>

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
    SuspensionModel m = doubling_const();
    CellBasis basis = CellBasis::build(m, 16, 16);
    int n = basis.n_cells();
    std::printf("cells = %d\n", n);

    // P: invariant measure on const roof = uniform (transfer fixes it exactly)
    DiscreteMeasure mu = invariant_measure(m, basis, 1.0);
    DiscreteMeasure uni = uniform_measure(basis);
    double dev = 0;
    for (int i = 0; i < n; ++i) dev = std::max(dev, std::abs(mu.coeffs[i] - uni.coeffs[i]));
    std::printf("P invariant vs uniform: %.3e   mass err %.3e\n", dev,
                std::abs(mass_functional(mu) - 1.0));

    // Q: eigen() top pair of M(1) = (1, uniform-ish)
    OperatorMatrix M1 = assemble_transfer(m, basis, 1.0);
    auto pairs = eigen(M1, 4);
    std::printf("Q top |lambda| = %.15f  residual %.3e  tag=%s\n",
                std::abs(pairs[0].eigenvalue), pairs[0].residual, pairs[0].vector.basis_tag.c_str());

    // Evaluator
    ResolventConfig rc;
    GeneratorMatrix gen = build_generator(m, basis, rc);
    ResolventEvaluator ev = ResolventEvaluator::build(gen);

    // R: evaluator matrix vs direct gen solve at a few zeta
    for (cplx zeta : {cplx(1.0, 0.3), cplx(3.0, -2.0)}) {
        OperatorMatrix direct = resolvent_from_generator(gen, zeta);
        ComplexMatrix md = ev.matrix(zeta);
        md -= direct.mat;
        std::printf("R |ev - gen| at (%.1f,%.1f): %.3e\n", zeta.real(), zeta.imag(), tv_opnorm(md));
    }

    // S: projector around 0, radius 0.25: rank 1, idempotent, fixes mu
    OperatorMatrix P0 = spectral_projector(ev, cplx(0, 0), 0.25);
    ComplexMatrix P2 = matmul(P0.mat, P0.mat);
    P2 -= P0.mat;
    std::printf("S rank = %d  |P^2-P| = %.3e\n",
                int(std::lround(P0.prov.params.at("rank"))), tv_opnorm(P2));
    DiscreteMeasure Pmu = apply_matrix(P0, mu);
    double pd = 0;
    for (int i = 0; i < n; ++i) pd += std::abs(Pmu.coeffs[i] - mu.coeffs[i]);
    std::printf("S |P mu - mu|_tv = %.3e\n", pd);

    // S2: radius independence 0.15 vs 0.3
    OperatorMatrix Pa = spectral_projector(ev, cplx(0, 0), 0.15);
    OperatorMatrix Pb = spectral_projector(ev, cplx(0, 0), 0.3);
    ComplexMatrix dP = Pa.mat;
    dP -= Pb.mat;
    std::printf("S2 radius independence: %.3e\n", tv_opnorm(dP));

    // S3: empty circle -> ~0
    OperatorMatrix Pe = spectral_projector(ev, cplx(1.0, 0.5), 0.2);
    std::printf("S3 empty-circle |P| = %.3e  rank %d\n", tv_opnorm(Pe.mat),
                int(std::lround(Pe.prov.params.at("rank"))));

    // S4: orthogonality P0 * P(2pi i cluster)? use conjugate pair circle at 2pi i
    // (pole at ~ -0.026 + 6.365i from discrete list): circle center 6.365i r=0.4
    OperatorMatrix Pc = spectral_projector(ev, cplx(-0.0264, 6.3651), 0.4);
    ComplexMatrix PP = matmul(P0.mat, Pc.mat);
    std::printf("S4 rank(Pc) = %d  |P0 Pc| = %.3e\n",
                int(std::lround(Pc.prov.params.at("rank"))), tv_opnorm(PP));

    // S5: diag vs direct-LU projector route
    OperatorMatrix Pd = spectral_projector_direct(gen, cplx(0, 0), 0.25);
    ComplexMatrix dd = Pd.mat;
    dd -= P0.mat;
    std::printf("S5 |diag - direct| = %.3e\n", tv_opnorm(dd));

    // T: pole scan, strip |Im| <= 14 catches k = 0, +-1, +-2
    Strip strip{-0.6, 0.3, 14.0};
    auto recs = pole_scan(ev, strip, 64);
    std::printf("T poles found: %zu\n", recs.size());
    for (const auto& r : recs)
        std::printf("   nu = %+.6f%+.6fi  order %d rank %d strength %.3e\n",
                    r.location.real(), r.location.imag(), r.order, r.rank, r.strength);

    // U: yosida ladder at t = 0.7 on a random measure
    DiscreteMeasure w = random_measure(basis, 99);
    OperatorMatrix Mt = assemble_transfer(m, basis, 0.7);
    DiscreteMeasure ref = apply_matrix(Mt, w);
    double prev = -1;
    for (int k : {4, 8, 16, 32}) {
        DiscreteMeasure y = yosida_approx(gen, w, 0.7, k);
        double err = 0;
        for (int i = 0; i < n; ++i) err += std::abs(y.coeffs[i] - ref.coeffs[i]);
        std::printf("U yosida n=%2d err = %.4e%s\n", k, err,
                    (prev > 0 && err < prev) ? "  (down)" : "");
        prev = err;
    }

    // V: refinement probe on small grids
    auto table = essential_radius_probe(m, cplx(2, 0), {12, 16, 20});
    std::printf("V lambda_fit = %.6f threshold = %.6f\n", table.lambda_fit, table.threshold);
    for (const auto& row : table.rows)
        std::printf("   g=%d cells=%d dense=%d outliers=%zu interior=%zu\n", row.grid,
                    row.n_cells, int(row.dense), row.outliers.size(), row.interior_sample.size());
    for (std::size_t i = 0; i < table.outlier_distance.size(); ++i)
        std::printf("   outlier dist %zu = %.4e\n", i, table.outlier_distance[i]);
    for (std::size_t i = 0; i < table.interior_distance.size(); ++i)
        std::printf("   interior dist %zu = %.4e\n", i, table.interior_distance[i]);
    std::printf("   outliers_stable=%d interior_stable=%d\n", int(table.outliers_stable),
                int(table.interior_stable));
    if (!table.rows.empty())
        for (std::size_t i = 0; i < std::min<std::size_t>(4, table.rows.back().outliers.size()); ++i) {
            cplx v = table.rows.back().outliers[i];
            std::printf("   outlier[%zu] = %+.6f%+.6fi |.| = %.6f\n", i, v.real(), v.imag(), std::abs(v));
        }

    // W: full report on perturbed model (smaller grid for speed)
    SuspensionModel mp = doubling_perturbed();
    CellBasis bp = CellBasis::build(mp, 12, 24);
    ReportOptions ro;
    ro.strip = {-0.5, 0.25, 10.0};
    SpectralReport rep = build_spectral_report(mp, bp, ro, "perturbed");
    std::printf("W cells=%d poles=%zu mixing=%d zero_gap=%.3e axis_poles=%zu rank=%d idem=%.3e simple=%d drift=%.3e\n",
                rep.n_cells, rep.poles.size(), int(rep.mixing), rep.zero_pole_gap,
                rep.axis_poles.size(), rep.projector_rank, rep.projector_defect,
                int(rep.zero_simple), rep.invariant_drift);
    for (const auto& r : rep.poles)
        if (std::abs(r.location.imag()) < 8 && r.location.real() > -0.4)
            std::printf("   pole %+.4f%+.4fi order %d strength %.2e\n", r.location.real(),
                        r.location.imag(), r.order, r.strength);
    return 0;
}
