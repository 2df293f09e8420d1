#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "common.hpp"
#include "linalg.hpp"
#include "measure.hpp"
#include "model.hpp"
#include "resolvent.hpp"

namespace sgs {

struct EigenPair {
    cplx eigenvalue;
    DiscreteMeasure vector; // TV norm 1, largest-modulus entry rotated to the positive real axis
    double residual;        // ||A v - lambda v|| in TV
};

namespace detail {

// Fix the scale/phase gauge of an eigenvector: TV norm 1 and the entry of
// largest modulus real positive, so eigenvectors from different grids or
// different solvers can be compared entrywise.
inline void normalize_eigvec(std::vector<cplx>& v) {
    double tv = 0.0;
    std::size_t imax = 0;
    double amax = -1.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        double a = std::abs(v[i]);
        tv += a;
        if (a > amax) {
            amax = a;
            imax = i;
        }
    }
    if (tv == 0.0 || amax <= 0.0) return;
    cplx scale = tv * (v[imax] / amax);
    for (auto& x : v) x /= scale;
}

} // namespace detail

// k largest-modulus eigenpairs of a discretized operator, dense path.
inline std::vector<EigenPair> eigen(const OperatorMatrix& op, int k) {
    if (k < 1) throw input_error("eigen: need k >= 1");
    int n = op.mat.rows();
    k = std::min(k, n);
    EigResult er = eig(op.mat);
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(),
              [&](int a, int b) { return std::abs(er.values[a]) > std::abs(er.values[b]); });
    std::vector<EigenPair> out;
    out.reserve(k);
    for (int r = 0; r < k; ++r) {
        int i = idx[r];
        std::vector<cplx> v(n);
        for (int row = 0; row < n; ++row) v[row] = er.vectors(row, i);
        detail::normalize_eigvec(v);
        std::vector<cplx> Av = matvec(op.mat, v);
        double res = 0.0;
        for (int row = 0; row < n; ++row) res += std::abs(Av[row] - er.values[i] * v[row]);
        out.push_back({er.values[i], DiscreteMeasure{op.basis_tag, std::move(v)}, res});
    }
    return out;
}

// Invariant density candidate: the transfer eigenvector at eigenvalue 1,
// cross-checked against an incommensurate second probe time. A single probe
// can have spurious fixed vectors when the probe time is commensurate with
// return times (a constant roof at an integer probe fixes every vertical
// profile), so the iteration runs on the average of the two probes: both
// have column sums exactly 1, the average has eigenvalue 1 exactly, and its
// fixed vector is the intersection of the two fixed spaces.
inline DiscreteMeasure invariant_measure(const SuspensionModel& m, const CellBasis& basis,
                                         double t_probe = 1.0, double value_tol = 1e-6,
                                         double crosscheck_tol = 0.05, int q = 8) {
    if (t_probe <= 0) throw input_error("invariant probe time must be positive");
    OperatorMatrix M = assemble_transfer(m, basis, t_probe, q);
    OperatorMatrix M2 = assemble_transfer(m, basis, t_probe * std::sqrt(2.0), q);
    ComplexMatrix avg = M.mat;
    avg.axpy(cplx(1.0, 0.0), M2.mat);
    avg *= cplx(0.5, 0.0);
    ShiftedEig se = shifted_inverse_eig(avg, cplx(1.0, 0.0));
    if (std::abs(se.value - 1.0) > value_tol)
        throw numeric_error("no transfer eigenvalue within tolerance of 1 at the probe time");
    DiscreteMeasure mu{basis.tag, std::move(se.vector)};
    cplx mass = mass_functional(mu);
    if (std::abs(mass) < 1e-12)
        throw numeric_error("fixed vector of the transfer probe has vanishing mass");
    for (auto& c : mu.coeffs) c /= mass;
    DiscreteMeasure mu2 = apply_matrix(M2, mu);
    double drift = 0.0;
    for (std::size_t i = 0; i < mu.coeffs.size(); ++i)
        drift += std::abs(mu2.coeffs[i] - mu.coeffs[i]);
    if (drift > crosscheck_tol)
        throw numeric_error("invariant candidate is not fixed by an independent probe time");
    return mu;
}

// Schur-factored resolvent family. One unitary reduction R(z0) = Q T Q*
// evaluates the whole pseudo-resolvent family through triangular solves:
//   R(zeta) = Q T (I + (zeta - z0) T)^{-1} Q*,
// with poles nu_i = z0 - 1/rho_i read off the diagonal of T. Unlike an
// eigenvector diagonalization this stays backward stable when R(z0) is
// defective to working precision, which the essential cluster of an Ulam
// matrix routinely is.
struct ResolventEvaluator {
    cplx z0;
    std::string basis_tag;
    ComplexMatrix Q, T;    // Schur form of R(z0)
    std::vector<cplx> rho; // diagonal of T

    static ResolventEvaluator build(const GeneratorMatrix& gen) {
        ResolventEvaluator ev;
        ev.z0 = gen.z0;
        ev.basis_tag = gen.basis_tag;
        int n = gen.reference.mat.rows();
        ev.T = gen.reference.mat;
        ev.Q = ComplexMatrix(n, n);
        ev.rho.resize(n);
        lapack_int sdim = 0;
        lapack_int info = LAPACKE_zgees(LAPACK_COL_MAJOR, 'V', 'N', nullptr, n, ev.T.data(), n,
                                        &sdim, ev.rho.data(), ev.Q.data(), n);
        if (info != 0) throw numeric_error("zgees failed on the reference resolvent");
        return ev;
    }

    int size() const { return Q.rows(); }

    cplx scalar(cplx zeta, cplx rho_i) const { return rho_i / (1.0 + (zeta - z0) * rho_i); }

    // Generator eigenvalue images of the nonzero reference eigenvalues. The
    // cluster at rho = 0 has no finite image and is skipped.
    std::vector<cplx> poles(double rho_floor = 1e-13) const {
        double top = 0.0;
        for (const cplx& r : rho) top = std::max(top, std::abs(r));
        std::vector<cplx> out;
        for (const cplx& r : rho)
            if (std::abs(r) > rho_floor * std::max(top, 1.0)) out.push_back(z0 - 1.0 / r);
        return out;
    }

    // I + (zeta - z0) T, the triangular pencil of the family.
    ComplexMatrix pencil(cplx zeta) const {
        int n = size();
        ComplexMatrix B = T;
        cplx c = zeta - z0;
        for (int j = 0; j < n; ++j) {
            cplx* col = B.col(j);
            for (int i = 0; i <= j; ++i) col[i] *= c;
            col[j] += 1.0;
        }
        return B;
    }

    // y = R(zeta) w: rotate into Schur coordinates, one triangular multiply
    // and one triangular solve, rotate back. Stable at any defectiveness.
    void apply(cplx zeta, const std::vector<cplx>& w, std::vector<cplx>& y) const {
        int n = size();
        ComplexMatrix B = pencil(zeta);
        std::vector<cplx> x(n);
        cplx one(1.0, 0.0), zero(0.0, 0.0);
        y.assign(n, cplx(0));
        cblas_zgemv(CblasColMajor, CblasConjTrans, n, n, &one, Q.data(), n, w.data(), 1, &zero,
                    x.data(), 1);
        cblas_ztrmv(CblasColMajor, CblasUpper, CblasNoTrans, CblasNonUnit, n, T.data(), n,
                    x.data(), 1);
        cblas_ztrsv(CblasColMajor, CblasUpper, CblasNoTrans, CblasNonUnit, n, B.data(), n,
                    x.data(), 1);
        cblas_zgemv(CblasColMajor, CblasNoTrans, n, n, &one, Q.data(), n, x.data(), 1, &zero,
                    y.data(), 1);
    }

    // Dense R(zeta) for tests and small grids: X = B^{-1} T back-rotated.
    ComplexMatrix matrix(cplx zeta) const {
        int n = size();
        ComplexMatrix B = pencil(zeta);
        ComplexMatrix X = T;
        cplx one(1.0, 0.0);
        cblas_ztrsm(CblasColMajor, CblasLeft, CblasUpper, CblasNoTrans, CblasNonUnit, n, n, &one,
                    B.data(), n, X.data(), n);
        ComplexMatrix QX = matmul(Q, X);
        ComplexMatrix out(n, n);
        cplx zero(0.0, 0.0);
        cblas_zgemm(CblasColMajor, CblasNoTrans, CblasConjTrans, n, n, n, &one, QX.data(), n,
                    Q.data(), n, &zero, out.data(), n);
        return out;
    }
};

// Time-t operator of the semigroup the resolvent family itself generates,
// exp(t (z0 - R(z0)^{-1})), by 2^log2_steps backward Euler steps done as
// repeated squaring of nu R(nu), nu = 2^s / t, in Schur coordinates. The
// per-mode error is ~ t^2 |nu_i|^2 / 2^{s+1}, and each factor is a
// contraction toward the left half plane, so the squarings are stable where
// a scaling-and-squaring exponential of the (nearly singular) inverse would
// not be. This is the operator a Laplace inversion of the family converges
// to; its distance to the directly assembled transfer matrix isolates the
// family-vs-transfer part of an inversion error.
inline OperatorMatrix family_semigroup(const ResolventEvaluator& ev, double t,
                                       int log2_steps = 20) {
    if (t <= 0) throw input_error("family semigroup needs a positive time");
    if (log2_steps < 1 || log2_steps > 40) throw input_error("family semigroup step count");
    int n = ev.size();
    double nu = std::ldexp(1.0, log2_steps) / t;
    ComplexMatrix b = ev.pencil(cplx(nu, 0.0));
    ComplexMatrix c = ev.T;
    cplx one(1.0, 0.0), zero(0.0, 0.0);
    cblas_ztrsm(CblasColMajor, CblasLeft, CblasUpper, CblasNoTrans, CblasNonUnit, n, n, &one,
                b.data(), n, c.data(), n);
    c *= cplx(nu, 0.0);
    ComplexMatrix tmp(n, n);
    for (int s = 0; s < log2_steps; ++s) {
        cblas_zgemm(CblasColMajor, CblasNoTrans, CblasNoTrans, n, n, n, &one, c.data(), n,
                    c.data(), n, &zero, tmp.data(), n);
        std::swap(c, tmp);
    }
    ComplexMatrix qc = matmul(ev.Q, c);
    OperatorMatrix out{ComplexMatrix(n, n),
                       {"family_semigroup", {{"t", t}, {"log2_steps", double(log2_steps)}}},
                       ev.basis_tag};
    cblas_zgemm(CblasColMajor, CblasNoTrans, CblasConjTrans, n, n, n, &one, qc.data(), n,
                ev.Q.data(), n, &zero, out.mat.data(), n);
    return out;
}

// Riesz spectral projector over the circle |zeta - center| = radius, by the
// periodic trapezoid rule in the Schur family. For a meromorphic integrand
// the trapezoid sum over a circle converges geometrically in the pole
// distances, so the diagonal lands exponentially close to 0/1 indicators.
inline OperatorMatrix spectral_projector(const ResolventEvaluator& ev, cplx center, double radius,
                                         int n_nodes = 64) {
    if (radius <= 0) throw input_error("projector contour needs a positive radius");
    if (n_nodes < 8) throw input_error("projector contour needs at least 8 nodes");
    for (const cplx& nu : ev.poles())
        if (std::abs(std::abs(nu - center) - radius) < radius / 10.0)
            throw numeric_error("projector contour passes too close to a resolvent pole");
    int n = ev.size();
    ComplexMatrix S(n, n);
    cplx one(1.0, 0.0);
    for (int k = 0; k < n_nodes; ++k) {
        double th = 2.0 * kPi * k / n_nodes;
        cplx e = std::polar(1.0, th);
        cplx zeta = center + radius * e;
        ComplexMatrix B = ev.pencil(zeta);
        ComplexMatrix X = ev.T;
        cblas_ztrsm(CblasColMajor, CblasLeft, CblasUpper, CblasNoTrans, CblasNonUnit, n, n, &one,
                    B.data(), n, X.data(), n);
        S.axpy(e * radius / double(n_nodes), X);
    }
    int rank = 0;
    for (int i = 0; i < n; ++i)
        if (std::abs(S(i, i)) > 0.5) ++rank;
    ComplexMatrix QS = matmul(ev.Q, S);
    ComplexMatrix P(n, n);
    cplx zero(0.0, 0.0);
    cblas_zgemm(CblasColMajor, CblasNoTrans, CblasConjTrans, n, n, n, &one, QS.data(), n,
                ev.Q.data(), n, &zero, P.data(), n);
    return {std::move(P),
            {"projector",
             {{"center_re", center.real()},
              {"center_im", center.imag()},
              {"radius", radius},
              {"n_nodes", double(n_nodes)},
              {"rank", double(rank)}}},
            ev.basis_tag};
}

// Same contour, evaluated the literal way: one dense solve per node through
// the generator anchor. Kept as the independent route for validating the
// diagonalized projector; cost grows with n_nodes, so tests use small grids.
inline OperatorMatrix spectral_projector_direct(const GeneratorMatrix& gen, cplx center,
                                                double radius, int n_nodes = 64) {
    if (radius <= 0) throw input_error("projector contour needs a positive radius");
    int n = gen.reference.mat.rows();
    ComplexMatrix acc(n, n);
    for (int k = 0; k < n_nodes; ++k) {
        double th = 2.0 * kPi * k / n_nodes;
        cplx e = std::polar(1.0, th);
        cplx zeta = center + radius * e;
        OperatorMatrix R = resolvent_from_generator(gen, zeta);
        acc.axpy(e * radius / double(n_nodes), R.mat);
    }
    return {std::move(acc),
            {"projector",
             {{"center_re", center.real()},
              {"center_im", center.imag()},
              {"radius", radius},
              {"n_nodes", double(n_nodes)},
              {"direct", 1.0}}},
            gen.basis_tag};
}

struct Strip {
    double re_min = -0.5;
    double re_max = 0.25;
    double im_max = 10.0;
};

struct PoleRecord {
    cplx location;
    int order = 1;   // slope-probe estimate, saturates at 3
    int rank = 1;    // number of merged discrete eigenvalues
    double strength; // TV norm of the residue
};

// Pole candidates of the resolvent family inside a strip. Locations come
// from the eigenvalue map of the reference resolvent, strengths from the
// rank-one residues V e_i (V^{-1})_i, and orders from the growth rate of
// ||R(zeta) w|| along a ray into each pole. density sets the merge pitch of
// the scan (poles closer than a pitch are reported as one cluster) and the
// conjugate pairing tolerance.
inline std::vector<PoleRecord> pole_scan(const ResolventEvaluator& ev, const Strip& strip,
                                         int density = 64, double strength_floor = 1e-10,
                                         std::uint64_t seed = 23) {
    if (density < 4) throw input_error("pole scan density must be at least 4");
    if (strip.re_max <= strip.re_min || strip.im_max <= 0)
        throw input_error("pole scan strip is empty");
    int n = ev.size();
    double pitch_re = (strip.re_max - strip.re_min) / density;
    double pitch_im = 2.0 * strip.im_max / density;
    double pitch = std::hypot(pitch_re, pitch_im);
    double top = 0.0;
    for (const cplx& r : ev.rho) top = std::max(top, std::abs(r));

    std::vector<int> sel_idx;
    for (int i = 0; i < n; ++i) {
        if (std::abs(ev.rho[i]) <= 1e-13 * std::max(top, 1.0)) continue;
        cplx nu = ev.z0 - 1.0 / ev.rho[i];
        if (nu.real() < strip.re_min || nu.real() > strip.re_max ||
            std::abs(nu.imag()) > strip.im_max)
            continue;
        sel_idx.push_back(i);
    }

    // residues through the Schur basis: for a selected simple eigenvalue the
    // family has residue (Q x)(Q y)^H / (y^H x) with x, y the triangular
    // right/left eigenvectors; its TV norm is the pole strength
    struct Cand {
        cplx nu;
        double strength;
    };
    std::vector<Cand> cands;
    if (!sel_idx.empty()) {
        int m_sel = static_cast<int>(sel_idx.size());
        std::vector<lapack_logical> select(n, 0);
        for (int i : sel_idx) select[i] = 1;
        ComplexMatrix Tc = ev.T;
        ComplexMatrix vl(n, m_sel), vr(n, m_sel);
        lapack_int m_out = 0;
        lapack_int info =
            LAPACKE_ztrevc(LAPACK_COL_MAJOR, 'B', 'S', select.data(), n, Tc.data(), n, vl.data(),
                           n, vr.data(), n, m_sel, &m_out);
        if (info != 0 || m_out != m_sel)
            throw numeric_error("ztrevc failed on selected pole candidates");
        cplx one(1.0, 0.0), zero(0.0, 0.0);
        std::vector<cplx> v(n), w(n);
        for (int k = 0; k < m_sel; ++k) {
            int i = sel_idx[k];
            cplx nu = ev.z0 - 1.0 / ev.rho[i];
            cblas_zgemv(CblasColMajor, CblasNoTrans, n, n, &one, ev.Q.data(), n, vr.col(k), 1,
                        &zero, v.data(), 1);
            cblas_zgemv(CblasColMajor, CblasNoTrans, n, n, &one, ev.Q.data(), n, vl.col(k), 1,
                        &zero, w.data(), 1);
            cplx wv = 0.0;
            double vn = 0.0, wn = 0.0;
            for (int row = 0; row < n; ++row) {
                wv += std::conj(w[row]) * v[row];
                vn += std::abs(v[row]);
                wn = std::max(wn, std::abs(w[row]));
            }
            if (std::abs(wv) < 1e-300) continue; // numerically defective pair
            double strength = vn * wn / std::abs(wv);
            if (strength < strength_floor) continue;
            cands.push_back({nu, strength});
        }
    }

    // merge candidates within a scan pitch into clusters
    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
        return a.strength > b.strength;
    });
    std::vector<PoleRecord> recs;
    std::vector<double> wsum;
    for (const Cand& c : cands) {
        bool merged = false;
        for (std::size_t k = 0; k < recs.size(); ++k) {
            if (std::abs(c.nu - recs[k].location) < pitch) {
                cplx loc = (recs[k].location * wsum[k] + c.nu * c.strength) /
                           (wsum[k] + c.strength);
                recs[k].location = loc;
                recs[k].strength += c.strength;
                recs[k].rank += 1;
                wsum[k] += c.strength;
                merged = true;
                break;
            }
        }
        if (!merged) {
            recs.push_back({c.nu, 1, 1, c.strength});
            wsum.push_back(c.strength);
        }
    }

    // a real family has a conjugate-symmetric pole set; average pairs and
    // snap near-axis singletons onto the axis
    for (std::size_t a = 0; a < recs.size(); ++a) {
        if (recs[a].location.imag() <= 0) continue;
        for (std::size_t b = 0; b < recs.size(); ++b) {
            if (recs[b].location.imag() >= 0) continue;
            if (std::abs(std::conj(recs[b].location) - recs[a].location) < pitch) {
                cplx avg = 0.5 * (recs[a].location + std::conj(recs[b].location));
                recs[a].location = avg;
                recs[b].location = std::conj(avg);
                double s = 0.5 * (recs[a].strength + recs[b].strength);
                recs[a].strength = recs[b].strength = s;
                break;
            }
        }
    }
    for (auto& r : recs)
        if (std::abs(r.location.imag()) < 0.5 * pitch_im / density)
            r.location = cplx(r.location.real(), 0.0);

    // order probe: ||R(nu + delta u) w|| ~ delta^{-order} for delta above the
    // location error and below the gap to the next pole
    SplitMix64 rng(seed);
    std::vector<cplx> w(n);
    for (auto& x : w) x = cplx(rng.uniform(-1, 1), rng.uniform(-1, 1));
    double tvw = 0.0;
    for (const cplx& x : w) tvw += std::abs(x);
    for (auto& x : w) x /= tvw;
    cplx u = std::polar(1.0, 0.6283185307179586); // fixed off-axis ray
    std::vector<cplx> y;
    for (auto& r : recs) {
        double gap = std::numeric_limits<double>::infinity();
        for (const auto& other : recs)
            if (&other != &r) gap = std::min(gap, std::abs(other.location - r.location));
        double d0 = std::min(0.1, 0.4 * gap);
        if (!(d0 > 1e-4)) d0 = 1e-4;
        std::vector<double> ld, lg;
        for (int j = 0; j < 4; ++j) {
            double d = d0 / std::pow(2.0, j);
            ev.apply(r.location + d * u, w, y);
            double g = 0.0;
            for (const cplx& x : y) g += std::abs(x);
            ld.push_back(std::log(d));
            lg.push_back(std::log(std::max(g, 1e-300)));
        }
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < ld.size(); ++i) {
            sx += ld[i];
            sy += lg[i];
            sxx += ld[i] * ld[i];
            sxy += ld[i] * lg[i];
        }
        double slope = (ld.size() * sxy - sx * sy) / (ld.size() * sxx - sx * sx);
        r.order = std::clamp(static_cast<int>(std::lround(-slope)), 1, 3);
    }

    std::sort(recs.begin(), recs.end(), [](const PoleRecord& a, const PoleRecord& b) {
        if (a.location.real() != b.location.real()) return a.location.real() > b.location.real();
        return a.location.imag() < b.location.imag();
    });
    return recs;
}

struct HeatSample {
    double re, im, log_norm;
};

// log10 ||R(zeta) w|| on a strip grid, for plotting the pole landscape.
inline std::vector<HeatSample> scan_heatmap(const ResolventEvaluator& ev, const Strip& strip,
                                            int density = 32, std::uint64_t seed = 23) {
    if (density < 2) throw input_error("heatmap density must be at least 2");
    int n = ev.size();
    SplitMix64 rng(seed);
    std::vector<cplx> w(n);
    for (auto& x : w) x = cplx(rng.uniform(-1, 1), rng.uniform(-1, 1));
    double tvw = 0.0;
    for (const cplx& x : w) tvw += std::abs(x);
    for (auto& x : w) x /= tvw;
    std::vector<HeatSample> out;
    out.reserve(std::size_t(density) * density);
    std::vector<cplx> y;
    for (int a = 0; a < density; ++a) {
        double re = strip.re_min + (strip.re_max - strip.re_min) * (a + 0.5) / density;
        for (int b = 0; b < density; ++b) {
            double im = -strip.im_max + 2.0 * strip.im_max * (b + 0.5) / density;
            ev.apply(cplx(re, im), w, y);
            double g = 0.0;
            for (const cplx& x : y) g += std::abs(x);
            out.push_back({re, im, std::log10(std::max(g, 1e-300))});
        }
    }
    return out;
}

// One backward-Euler style semigroup step chain through the resolvent:
//   mu_n = (nu R(nu))^n mu,  nu = n / t,
// with a single factorization of ((nu - z0) R(z0) + I) reused for all steps.
inline DiscreteMeasure yosida_approx(const GeneratorMatrix& gen, const DiscreteMeasure& mu,
                                     double t, int n_steps) {
    if (t <= 0 || n_steps < 1) throw input_error("yosida step needs t > 0 and n >= 1");
    cplx nu(double(n_steps) / t, 0.0);
    int n = gen.reference.mat.rows();
    ComplexMatrix A = gen.reference.mat;
    A *= (nu - gen.z0);
    for (int i = 0; i < n; ++i) A(i, i) += 1.0;
    LuFactors lu = lu_factor(std::move(A));
    DiscreteMeasure out = mu;
    for (int s = 0; s < n_steps; ++s) {
        std::vector<cplx> w = matvec(gen.reference.mat, out.coeffs);
        out.coeffs = lu.solve(w);
        for (auto& x : out.coeffs) x *= nu;
    }
    return out;
}

struct ProbeRow {
    int grid = 0;
    std::string basis_tag;
    int n_cells = 0;
    bool dense = false;               // full spectrum available on this row
    std::vector<cplx> outliers;       // |rho| above the essential threshold
    std::vector<cplx> interior_sample; // dense rows: band just under the threshold
};

struct RefinementTable {
    cplx z;
    double lambda_fit = 0.0;
    double threshold = 0.0; // 1 / (Re z + lambda_fit) + margin
    double margin = 0.0;
    std::vector<ProbeRow> rows;
    std::vector<double> outlier_distance;  // consecutive rows, bottleneck match
    std::vector<double> interior_distance; // consecutive dense rows, same metric
    bool outliers_stable = false;
    bool interior_stable = false;
};

struct ProbeOptions {
    double margin = 0.05;
    int dense_limit = 2600;  // cells; full zgeev above this is not worth it
    int krylov_dim = 140;
    double ritz_tol = 1e-8;
    double stability_tol = 0.02;
    int interior_cap = 48;
    std::uint64_t seed = 31;
    int expansion_samples = 200;
    std::vector<double> expansion_t_grid = {1.0, 2.0, 3.0, 4.0};
};

namespace detail {

// Bottleneck distance between two spectral point sets under an optimal
// pairing; infinity when the counts differ.
inline double match_distance(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    if (a.empty() && b.empty()) return 0.0;
    if (a.empty() || b.empty() || a.size() != b.size())
        return std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> cost(a.size(), std::vector<double>(b.size()));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) cost[i][j] = std::abs(a[i] - b[j]);
    std::vector<int> asg = min_cost_assignment(cost);
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, cost[i][asg[i]]);
    return d;
}

// Pairing distance that tolerates different counts: matches the smaller set
// into the larger and reports the bottleneck over matched pairs.
inline double partial_match_distance(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    if (a.empty() || b.empty()) return std::numeric_limits<double>::infinity();
    const std::vector<cplx>& rows = a.size() <= b.size() ? a : b;
    const std::vector<cplx>& cols = a.size() <= b.size() ? b : a;
    std::vector<std::vector<double>> cost(rows.size(), std::vector<double>(cols.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j) cost[i][j] = std::abs(rows[i] - cols[j]);
    std::vector<int> asg = min_cost_assignment(cost);
    double d = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) d = std::max(d, cost[i][asg[i]]);
    return d;
}

} // namespace detail

// Outlier stability of the resolvent spectrum under grid refinement. The
// essential part of the spectrum lives inside |rho| <= 1/(Re z + lambda) and
// is grid noise; everything outside that radius plus a margin must persist.
// Dense rows keep a band of interior eigenvalues so the churn of the
// essential cluster is visible in the same table.
inline RefinementTable essential_radius_probe(const SuspensionModel& m, cplx z,
                                              const std::vector<int>& grids,
                                              const ProbeOptions& opts = {},
                                              const ResolventConfig& rcfg = {}) {
    if (grids.empty()) throw input_error("refinement probe needs at least one grid");
    if (z.real() <= 0) throw input_error("refinement probe needs Re z > 0");
    RefinementTable table;
    table.z = z;
    ExpansionReport rep =
        verify_expansion(m, opts.expansion_samples, opts.expansion_t_grid, 0.02, opts.seed);
    table.lambda_fit = rep.lambda_hat;
    table.margin = opts.margin;
    table.threshold = 1.0 / (z.real() + rep.lambda_hat) + opts.margin;
    for (int g : grids) {
        if (g < 2) throw input_error("refinement grid must be at least 2");
        CellBasis basis = CellBasis::build(m, g, g);
        ProbeRow row;
        row.grid = g;
        row.basis_tag = basis.tag;
        row.n_cells = basis.n_cells();
        if (row.n_cells <= opts.dense_limit) {
            row.dense = true;
            OperatorMatrix R = resolvent_power(m, basis, z, 1, rcfg);
            EigResult er = eig(std::move(R.mat), false);
            for (const cplx& v : er.values) {
                if (std::abs(v) > table.threshold)
                    row.outliers.push_back(v);
                else
                    row.interior_sample.push_back(v);
            }
            // keep the largest interior moduli: the band just under the
            // threshold is where essential churn shows
            std::sort(row.interior_sample.begin(), row.interior_sample.end(),
                      [](cplx a, cplx b) { return std::abs(a) > std::abs(b); });
            if (static_cast<int>(row.interior_sample.size()) > opts.interior_cap)
                row.interior_sample.resize(opts.interior_cap);
        } else {
            ResolventApplier ap = ResolventApplier::build(m, basis, z, 1, rcfg);
            auto apply = [&](const cplx* w, cplx* y) { ap.apply(w, y); };
            std::vector<RitzPair> ritz =
                arnoldi_eigs(apply, std::size_t(row.n_cells), opts.krylov_dim, opts.seed);
            for (const RitzPair& p : ritz)
                if (std::abs(p.value) > table.threshold && p.residual <= opts.ritz_tol)
                    row.outliers.push_back(p.value);
        }
        std::sort(row.outliers.begin(), row.outliers.end(), [](cplx a, cplx b) {
            if (std::abs(a) != std::abs(b)) return std::abs(a) > std::abs(b);
            return a.imag() < b.imag();
        });
        table.rows.push_back(std::move(row));
    }
    table.outliers_stable = table.rows.size() >= 2;
    table.interior_stable = true;
    bool saw_interior_pair = false;
    for (std::size_t i = 0; i + 1 < table.rows.size(); ++i) {
        double d = detail::match_distance(table.rows[i].outliers, table.rows[i + 1].outliers);
        table.outlier_distance.push_back(d);
        if (!(d <= opts.stability_tol)) table.outliers_stable = false;
        if (table.rows[i].dense && table.rows[i + 1].dense) {
            double di = detail::partial_match_distance(table.rows[i].interior_sample,
                                                       table.rows[i + 1].interior_sample);
            table.interior_distance.push_back(di);
            saw_interior_pair = true;
            if (!(di <= opts.stability_tol)) table.interior_stable = false;
        }
    }
    if (!saw_interior_pair) table.interior_stable = false;
    return table;
}

struct ReportOptions {
    double t_probe = 1.0;
    cplx z_ref = cplx(2.0, 0.0);
    Strip strip;
    double axis_band = 0.02;   // |Re nu| below this counts as "on the axis"
    int k_eigs = 8;
    int density = 64;
    double proj_radius = 0.25;
    int n_nodes = 64;
    int q = 8;
};

// One-stop spectral summary of a model on a basis: leading transfer and
// resolvent eigenvalues, the pole list of the resolvent family in a strip,
// the invariant candidate's independence check, and the two verdicts the
// whole construction is after (is z = 0 the only axis pole, and is it
// simple).
struct SpectralReport {
    std::string model_name;
    std::string basis_tag;
    int n_cells = 0;
    double t_probe = 0.0;
    cplx z_ref;
    Strip strip;
    double axis_band = 0.0;
    std::vector<cplx> transfer_leading;
    std::vector<cplx> resolvent_leading;
    std::vector<PoleRecord> poles;
    double invariant_drift = 0.0; // TV change of the invariant candidate under a second probe
    cplx zero_pole;
    double zero_pole_gap = 0.0;
    std::vector<cplx> axis_poles; // nonzero poles on the axis band, mixing obstructions
    bool mixing = false;
    int projector_rank = 0;
    double projector_defect = 0.0; // ||P^2 - P|| in TV
    bool zero_simple = false;
};

inline SpectralReport build_spectral_report(const SuspensionModel& m, const CellBasis& basis,
                                            const ReportOptions& opts = {},
                                            std::string model_name = {}) {
    SpectralReport rep;
    rep.model_name = std::move(model_name);
    rep.basis_tag = basis.tag;
    rep.n_cells = basis.n_cells();
    rep.t_probe = opts.t_probe;
    rep.z_ref = opts.z_ref;
    rep.strip = opts.strip;
    rep.axis_band = opts.axis_band;

    OperatorMatrix M = assemble_transfer(m, basis, opts.t_probe, opts.q);
    for (const EigenPair& p : eigen(M, opts.k_eigs)) rep.transfer_leading.push_back(p.eigenvalue);

    ResolventConfig rcfg;
    rcfg.reference_z = opts.z_ref;
    rcfg.q = opts.q;
    GeneratorMatrix gen = build_generator(m, basis, rcfg);
    ResolventEvaluator ev = ResolventEvaluator::build(gen);
    {
        std::vector<int> idx(ev.rho.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
        std::sort(idx.begin(), idx.end(),
                  [&](int a, int b) { return std::abs(ev.rho[a]) > std::abs(ev.rho[b]); });
        for (int i = 0; i < std::min<int>(opts.k_eigs, idx.size()); ++i)
            rep.resolvent_leading.push_back(ev.rho[idx[i]]);
    }

    DiscreteMeasure mu = invariant_measure(m, basis, opts.t_probe, 1e-6, 0.05, opts.q);
    OperatorMatrix M2 = assemble_transfer(m, basis, opts.t_probe * std::sqrt(2.0), opts.q);
    DiscreteMeasure mu2 = apply_matrix(M2, mu);
    rep.invariant_drift = 0.0;
    for (std::size_t i = 0; i < mu.coeffs.size(); ++i)
        rep.invariant_drift += std::abs(mu2.coeffs[i] - mu.coeffs[i]);

    rep.poles = pole_scan(ev, opts.strip, opts.density);
    rep.zero_pole_gap = std::numeric_limits<double>::infinity();
    for (const PoleRecord& p : rep.poles) {
        double d = std::abs(p.location);
        if (d < rep.zero_pole_gap) {
            rep.zero_pole_gap = d;
            rep.zero_pole = p.location;
        }
        if (std::abs(p.location.real()) <= opts.axis_band && d > opts.axis_band)
            rep.axis_poles.push_back(p.location);
    }
    rep.mixing = rep.zero_pole_gap <= opts.axis_band && rep.axis_poles.empty();

    OperatorMatrix proj = spectral_projector(ev, cplx(0.0, 0.0), opts.proj_radius, opts.n_nodes);
    rep.projector_rank = static_cast<int>(std::lround(proj.prov.params.at("rank")));
    ComplexMatrix P2 = matmul(proj.mat, proj.mat);
    P2 -= proj.mat;
    rep.projector_defect = tv_opnorm(P2);
    rep.zero_simple = rep.projector_rank == 1 && rep.projector_defect <= 1e-7;
    return rep;
}

} // namespace sgs
