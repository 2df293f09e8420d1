#include <cstdio>
#include <semigroup_spectra/resolvent.hpp>

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
    CellBasis basis = CellBasis::build(m, 16, 16);
    int n = basis.n_cells();
    std::printf("cells = %d\n", n);

    ResolventConfig cfg;

    // A: column sums of the exact-path resolvent are s0(z) = (1 - e^{-zT})/z
    cplx z2(2.0, 0.0);
    double T2 = cfg.horizon(z2);
    OperatorMatrix R2 = resolvent_quadrature(m, basis, z2, cfg);
    cplx s0 = (1.0 - std::exp(-z2 * T2)) / z2;
    double dev = 0.0;
    for (int j = 0; j < n; ++j) {
        cplx cs = 0.0;
        for (int i = 0; i < n; ++i) cs += R2.mat(i, j);
        dev = std::max(dev, std::abs(cs - s0));
    }
    std::printf("A colsum dev vs s0: %.3e   (s0 = %.15f, 1/z = 0.5)\n", dev, s0.real());

    // B: TV operator norm bound
    double tv2 = tv_opnorm(R2.mat);
    std::printf("B tv_opnorm(R(2)) = %.15f  bound 1/Re z = 0.5  strict: %s\n", tv2,
                tv2 <= 0.5 ? "yes" : "NO");

    // C: complex z
    cplx zc(2.0, 3.0);
    OperatorMatrix Rc = resolvent_quadrature(m, basis, zc, cfg);
    double Tc = cfg.horizon(zc);
    cplx s0c = (1.0 - std::exp(-zc * Tc)) / zc;
    double devc = 0.0;
    for (int j = 0; j < n; ++j) {
        cplx cs = 0.0;
        for (int i = 0; i < n; ++i) cs += Rc.mat(i, j);
        devc = std::max(devc, std::abs(cs - s0c));
    }
    std::printf("C colsum dev at 2+3i: %.3e   tv = %.6f (bound %.6f)\n", devc,
                tv_opnorm(Rc.mat), (1.0 - std::exp(-2.0 * Tc)) / 2.0);

    // D: pseudo-resolvent identity through one generator
    GeneratorMatrix gen = build_generator(m, basis, cfg);
    cplx za(1.0, 0.0), zb(2.0, 1.0);
    OperatorMatrix Ra = resolvent_from_generator(gen, za);
    OperatorMatrix Rb = resolvent_from_generator(gen, zb);
    ComplexMatrix lhs = matmul(Rb.mat, Ra.mat);
    lhs *= (za - zb);
    ComplexMatrix rhs = Rb.mat;
    rhs -= Ra.mat;
    lhs -= rhs;
    std::printf("D pseudo-resolvent residual (gen path): %.3e\n", tv_opnorm(lhs));

    // E: uniform measure is an eigenvector with eigenvalue s0
    DiscreteMeasure mu = uniform_measure(basis);
    std::vector<cplx> Rmu = matvec(R2.mat, mu.coeffs);
    double eig_res = 0.0;
    for (int i = 0; i < n; ++i) eig_res += std::abs(Rmu[i] - s0 * mu.coeffs[i]);
    std::printf("E |R(2)mu* - s0 mu*|_tv = %.3e   |s0 - 1/z| = %.3e\n", eig_res,
                std::abs(s0 - 1.0 / z2));

    // F: mass functional of Z_h mu
    DiscreteMeasure mur = random_measure(basis, 7);
    DiscreteMeasure zmu = gen.apply(mur);
    std::printf("F |l(Z_h mu)| = %.3e  (needs <= 1e-9)\n", std::abs(mass_functional(zmu)));

    // G: resolvent power vs cubed matrix
    OperatorMatrix R2p3 = resolvent_power(m, basis, z2, 3, cfg);
    ComplexMatrix cube = matmul(R2.mat, matmul(R2.mat, R2.mat));
    ComplexMatrix diff = R2p3.mat;
    diff -= cube;
    std::printf("G tv(power3 - cube) = %.3e   tv(cube) = %.3e\n", tv_opnorm(diff),
                tv_opnorm(cube));
    std::vector<cplx> p3mu = matvec(R2p3.mat, mu.coeffs);
    std::vector<cplx> c3mu = matvec(cube, mu.coeffs);
    double d3a = 0.0, d3b = 0.0;
    for (int i = 0; i < n; ++i) {
        d3a += std::abs(p3mu[i] - mu.coeffs[i] / 8.0);
        d3b += std::abs(c3mu[i] - mu.coeffs[i] / 8.0);
    }
    std::printf("G on mu*: |power3 mu - mu/8| = %.3e  |cube mu - mu/8| = %.3e\n", d3a, d3b);

    // H: continuation vs generator path from the same anchor
    ResolventConfig cfg3 = cfg;
    cfg3.reference_z = cplx(3.0, 0.0);
    OperatorMatrix R3 = resolvent_quadrature(m, basis, cfg3.reference_z, cfg3);
    GeneratorMatrix gen3 = build_generator(m, basis, cfg3);
    OperatorMatrix cont2 = continuation_to(R3, cplx(2.0, 0.0));
    OperatorMatrix gen2 = resolvent_from_generator(gen3, cplx(2.0, 0.0));
    ComplexMatrix hd = cont2.mat;
    hd -= gen2.mat;
    std::printf("H tv(continuation(3->2) - gen path) = %.3e\n", tv_opnorm(hd));
    ComplexMatrix hd2 = cont2.mat;
    hd2 -= R2.mat;
    std::printf("H tv(continuation(3->2) - direct assembly at 2) = %.3e  (family defect)\n",
                tv_opnorm(hd2));

    // I: continuation across Re z = 0, away from poles
    OperatorMatrix cleft = continuation_to(R2, cplx(-0.05, 0.5));
    std::printf("I tv(R(-0.05+0.5i)) = %.6f (finite, no throw)\n", tv_opnorm(cleft.mat));

    // J: discrete pole near 2 pi i, then proximity error with estimate
    EigResult er = eig(R2.mat, false);
    cplx pole_d;
    double best = 1e9;
    for (cplx rho : er.values) {
        if (std::abs(rho) < 1e-8) continue;
        cplx nu = z2 - 1.0 / rho;
        double d = std::abs(nu - cplx(0.0, 2.0 * kPi));
        if (d < best) {
            best = d;
            pole_d = nu;
        }
    }
    std::printf("J discrete pole nearest 2 pi i: %.6f%+.6fi  |err| = %.3e\n", pole_d.real(),
                pole_d.imag(), best);
    try {
        resolvent_from_generator(gen, pole_d + cplx(1e-9, 0.0));
        std::printf("J NO THROW (unexpected)\n");
    } catch (const pole_proximity_error& e) {
        std::printf("J pole_proximity_error, estimate err vs discrete pole: %.3e\n",
                    std::abs(e.eigenvalue_estimate - pole_d));
    }

    // L: leading eigenvector drift across directly assembled resolvents
    auto lead = [&](const ComplexMatrix& M, cplx target) {
        ShiftedEig se = shifted_inverse_eig(M, target);
        double tv = vec_norm1(se.vector);
        int big = 0;
        for (int i = 1; i < n; ++i)
            if (std::abs(se.vector[i]) > std::abs(se.vector[big])) big = i;
        cplx ph = se.vector[big] / std::abs(se.vector[big]);
        for (auto& x : se.vector) x /= (tv * ph);
        return se;
    };
    double T3 = cfg.horizon(cplx(3.0, 0.0));
    cplx s0_3 = (1.0 - std::exp(-cplx(3.0, 0.0) * T3)) / cplx(3.0, 0.0);
    ShiftedEig e2 = lead(R2.mat, s0);
    ShiftedEig e3 = lead(R3.mat, s0_3);
    double drift = 0.0;
    for (int i = 0; i < n; ++i) drift += std::abs(e2.vector[i] - e3.vector[i]);
    std::printf("L |val(2)-s0| = %.3e  residual2 = %.3e  direct-family eigvec drift = %.3e\n",
                std::abs(e2.value - s0), e2.residual, drift);

    // M: same through one generator at two z
    ShiftedEig g2e = lead(gen2.mat, 1.0 / cplx(2.0, 0.0));
    ShiftedEig g15 = lead(resolvent_from_generator(gen3, cplx(1.5, 0.0)).mat, 1.0 / 1.5);
    double gdrift = 0.0;
    for (int i = 0; i < n; ++i) gdrift += std::abs(g2e.vector[i] - g15.vector[i]);
    std::printf("M gen-family eigvec drift = %.3e\n", gdrift);

    // N: materialized generators from two anchors
    ResolventConfig cfg4 = cfg;
    cfg4.reference_z = cplx(4.0, 0.0);
    GeneratorMatrix gen4 = build_generator(m, basis, cfg4);
    ComplexMatrix zh2 = gen.zh_dense();
    ComplexMatrix zh4 = gen4.zh_dense();
    ComplexMatrix zhd = zh2;
    zhd -= zh4;
    std::printf("N tv(Z_h(2)) = %.3e  tv(Z_h(2)-Z_h(4)) = %.3e\n", tv_opnorm(zh2),
                tv_opnorm(zhd));
    OperatorMatrix r15a = resolvent_from_generator(gen, cplx(1.5, 0.0));
    OperatorMatrix r15b = resolvent_from_generator(gen4, cplx(1.5, 0.0));
    ComplexMatrix r15d = r15a.mat;
    r15d -= r15b.mat;
    std::printf("N tv(R(1.5) via anchor 2 vs 4) = %.3e\n", tv_opnorm(r15d));

    // O: is the resolvent eigenvector fixed by the transfer matrices
    OperatorMatrix M1 = assemble_transfer(m, basis, 1.0);
    OperatorMatrix Ms2 = assemble_transfer(m, basis, std::sqrt(2.0));
    std::vector<cplx> f1 = matvec(M1.mat, e2.vector);
    std::vector<cplx> f2 = matvec(Ms2.mat, e2.vector);
    double o1 = 0.0, o2 = 0.0;
    for (int i = 0; i < n; ++i) {
        o1 += std::abs(f1[i] - e2.vector[i]);
        o2 += std::abs(f2[i] - e2.vector[i]);
    }
    std::printf("O |M(1) mu^ - mu^| = %.3e   |M(sqrt2) mu^ - mu^| = %.3e\n", o1, o2);

    // K: composite-GL path distance from exact path
    ResolventConfig cfgGL = cfg;
    cfgGL.path = TimePath::CompositeGL;
    OperatorMatrix Rgl = resolvent_quadrature(m, basis, z2, cfgGL);
    ComplexMatrix kd = Rgl.mat;
    kd -= R2.mat;
    std::printf("K tv(GL path - exact path) = %.3e\n", tv_opnorm(kd));

    return 0;
}
