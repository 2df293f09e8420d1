#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "common.hpp"
#include "linalg.hpp"
#include "measure.hpp"
#include "model.hpp"
#include "threads.hpp"

namespace sgs {

// Raised when a linear solve sits too close to a spectral point; carries the
// nearest-eigenvalue estimate obtained by inverse iteration on the factored
// system.
struct pole_proximity_error : numeric_error {
    cplx eigenvalue_estimate;
    pole_proximity_error(const std::string& msg, cplx est)
        : numeric_error(msg), eigenvalue_estimate(est) {}
};

enum class TimePath { Exact, CompositeGL };

struct ResolventConfig {
    double tail_tol = 1e-12; // bound on the discarded tail; must stay <= 1e-10
    double t_max = 0.0;      // extra horizon floor; the tail bound is always enforced
    TimePath path = TimePath::Exact;
    int n_time_nodes = 6;    // nodes per panel, composite-GL path
    double panel_cap = 0.75; // max panel width
    cplx reference_z = cplx(2.0, 0.0);
    int q = 8;

    // Truncation horizon for the weight t^{n-1} e^{-Re(z) t} / (n-1)!; the
    // fixed point of the log tail bound keeps the discarded mass near
    // tail_tol / Re(z) for every n.
    double horizon(cplx z, int n = 1) const {
        if (tail_tol <= 0 || tail_tol > 1e-10)
            throw input_error("tail_tol must lie in (0, 1e-10]");
        double re = z.real();
        double T = -std::log(tail_tol) / re;
        for (int it = 0; n > 1 && it < 8; ++it)
            T = (-std::log(tail_tol) + (n - 1) * std::log(std::max(T, 1.0)) - std::lgamma(n)) /
                re;
        return std::max(T, t_max);
    }
};

namespace detail {

// Tail integrals J_m(t) = Integral_t^inf s^m e^{-zs} ds / m! for m < n, by
// integrating by parts: J_m = (t^m e^{-zt} / m! + J_{m-1}) / z.
inline void jtail(cplx z, double t, int n, cplx* out) {
    cplx e = std::exp(-z * t);
    cplx j = e / z;
    out[0] = j;
    double pw = 1.0, fact = 1.0;
    for (int m = 1; m < n; ++m) {
        pw *= t;
        fact *= m;
        j = (pw / fact * e + j) / z;
        out[m] = j;
    }
}

} // namespace detail

// Stored column structure of the exact-path R(z)^n = (1/(n-1)!)
// Integral_0^inf t^{n-1} e^{-zt} M(t) dt. The vertical coordinate is
// integrated analytically: from a start (x, c) the segment times are affine
// in c up to the first fold and rigidly shifted by the fold time r(x)(1-c)
// afterwards, so averaging over the starting cell reduces to tail integrals
// J_m, and one post-fold itinerary is shared by the n_y cells of an
// x-column. Only x keeps q point samples.
//
// Keeping the per-sample weights and segment moments instead of scattering
// them immediately gives two consumers for the price of one pass:
// to_dense() materializes the matrix, apply() acts on a vector without ever
// forming it, which is what large grids need for Krylov eigensolves.
struct ResolventApplier {
    int nc = 0, ny = 0, n = 1, n_units = 0, q = 8;
    cplx z;
    double t_max = 0.0;
    std::string basis_tag;

    struct Sample {
        std::uint32_t col0;   // first cell of the owning x-column
        cplx wown;            // own-row weight (tail of [0, r(1-c)] averaged in c)
        std::uint64_t pat_begin = 0, pat_end = 0;
    };
    std::vector<Sample> samples;        // unit-major, q per unit
    std::vector<cplx> wpre;             // samples x (ny-1): rows above the start
    std::vector<cplx> phase;            // samples x ny x n: fold-phase coefficients
    std::vector<std::uint32_t> pat_cell;
    std::vector<cplx> pat_mom;          // n exp-moments per pattern entry

    static ResolventApplier build(const SuspensionModel& m, const CellBasis& basis, cplx z,
                                  int n, const ResolventConfig& config = {}) {
        if (z.real() <= 0) throw input_error("resolvent horizon requires Re z > 0");
        if (n < 1) throw input_error("resolvent power needs n >= 1");
        ResolventApplier ap;
        ap.nc = basis.n_cells();
        ap.ny = basis.n_y;
        ap.n = n;
        ap.n_units = basis.n_strips * basis.n_x;
        ap.q = config.q;
        ap.z = z;
        ap.t_max = config.horizon(z, n);
        ap.basis_tag = basis.tag;
        int q = config.q, ny = basis.n_y;
        double dc = basis.dc;
        double T = ap.t_max;
        cplx zinv = 1.0 / z;
        std::vector<double> fact(n), binom(std::size_t(n) * n, 0.0);
        fact[0] = 1.0;
        for (int i = 1; i < n; ++i) fact[i] = fact[i - 1] * i;
        for (int i = 0; i < n; ++i) {
            binom[std::size_t(i) * n] = 1.0;
            for (int a = 1; a <= i; ++a)
                binom[std::size_t(i) * n + a] = binom[std::size_t(i - 1) * n + a - 1] +
                                                (a < i ? binom[std::size_t(i - 1) * n + a] : 0.0);
        }
        struct Chunk {
            std::vector<Sample> samples;
            std::vector<cplx> wpre, phase;
            std::vector<std::uint32_t> pat_cell;
            std::vector<cplx> pat_mom;
        };
        std::vector<Chunk> chunks(ap.n_units);
        double wq = 1.0 / q;
        parallel_for(ap.n_units, [&](int u) {
            int j = u / basis.n_x, ix = u % basis.n_x;
            Interval cx = basis.cell_x(j, ix);
            Chunk& ck = chunks[u];
            std::vector<cplx> jg(std::size_t(ny + 1) * n), j0(n), nb(n);
            for (int a = 0; a < q; ++a) {
                double x = cx.lo + cx.length() * (a + 0.5) / q;
                double r = m.roof().eval(x);
                double rdc = r * dc;
                for (int d = 0; d <= ny; ++d) detail::jtail(z, d * rdc, n, &jg[std::size_t(d) * n]);
                detail::jtail(z, 0.0, n, j0.data());
                Sample s;
                s.col0 = std::uint32_t(basis.index(j, ix, 0));
                // own-row weight: segment [0, r(1 - c)] averaged over c
                cplx wown = j0[n - 1];
                for (int k = 0; k < n; ++k)
                    wown -= std::pow(zinv, n - k) / rdc * (jg[k] - jg[n + k]);
                s.wown = wq * wown;
                // rows d+1 above the start: common shift, grid tail integrals
                for (int d = 0; d + 1 < ny; ++d) {
                    cplx w = 0.0;
                    for (int k = 0; k < n; ++k)
                        w += std::pow(zinv, n - k) * (jg[std::size_t(d) * n + k] -
                                                      2.0 * jg[std::size_t(d + 1) * n + k] +
                                                      jg[std::size_t(d + 2) * n + k]);
                    ck.wpre.push_back(wq * w / rdc);
                }
                // fold-phase coefficients per starting row iy
                for (int iy = 0; iy < ny; ++iy) {
                    double phimin = r * (1.0 - (iy + 1) * dc), phimax = phimin + rdc;
                    cplx emin = std::exp(-z * phimin), emax = std::exp(-z * phimax);
                    double pmin = 1.0, pmax = 1.0;
                    for (int b = 0; b < n; ++b) {
                        nb[b] = pmin * emin - pmax * emax;
                        pmin *= phimin;
                        pmax *= phimax;
                    }
                    for (int aa = 0; aa < n; ++aa) {
                        cplx cf = 0.0;
                        for (int b = 0; aa + b < n; ++b) {
                            int i = aa + b;
                            cf += double(n - i) * std::pow(zinv, n + 1 - i) *
                                  binom[std::size_t(i) * n + aa] / fact[i] * nb[b];
                        }
                        ck.phase.push_back(cf * wq / rdc);
                    }
                }
                // shared post-fold pattern from the fold image (f(x), 0)
                s.pat_begin = ck.pat_cell.size();
                double t_prev = -1.0;
                cplx e_prev = 1.0;
                cell_itinerary(m, basis, m.base().eval(x), 0.0, T,
                               [&](int cell, double t0, double t1) {
                                   cplx e0 = (t0 == t_prev) ? e_prev : std::exp(-z * t0);
                                   cplx e1 = std::exp(-z * t1);
                                   ck.pat_cell.push_back(std::uint32_t(cell));
                                   double p0 = 1.0, p1 = 1.0;
                                   for (int aa = 0; aa < n; ++aa) {
                                       ck.pat_mom.push_back(p0 * e0 - p1 * e1);
                                       p0 *= t0;
                                       p1 *= t1;
                                   }
                                   t_prev = t1;
                                   e_prev = e1;
                               });
                s.pat_end = ck.pat_cell.size();
                ck.samples.push_back(s);
            }
        });
        std::size_t n_pat = 0;
        for (const Chunk& ck : chunks) n_pat += ck.pat_cell.size();
        ap.samples.reserve(std::size_t(ap.n_units) * q);
        ap.wpre.reserve(std::size_t(ap.n_units) * q * std::max(ny - 1, 0));
        ap.phase.reserve(std::size_t(ap.n_units) * q * ny * n);
        ap.pat_cell.reserve(n_pat);
        ap.pat_mom.reserve(n_pat * n);
        for (Chunk& ck : chunks) {
            std::uint64_t base = ap.pat_cell.size();
            for (Sample s : ck.samples) {
                s.pat_begin += base;
                s.pat_end += base;
                ap.samples.push_back(s);
            }
            ap.wpre.insert(ap.wpre.end(), ck.wpre.begin(), ck.wpre.end());
            ap.phase.insert(ap.phase.end(), ck.phase.begin(), ck.phase.end());
            ap.pat_cell.insert(ap.pat_cell.end(), ck.pat_cell.begin(), ck.pat_cell.end());
            ap.pat_mom.insert(ap.pat_mom.end(), ck.pat_mom.begin(), ck.pat_mom.end());
            ck = Chunk{};
        }
        return ap;
    }

    // Scatter one sample's columns into dense storage.
    ComplexMatrix to_dense() const {
        ComplexMatrix A(nc, nc);
        int q_ = q, ny_ = ny, n_ = n;
        parallel_for(n_units, [&](int u) {
            for (int a = 0; a < q_; ++a) {
                std::size_t si = std::size_t(u) * q_ + a;
                const Sample& s = samples[si];
                const cplx* pre = &wpre[si * std::size_t(std::max(ny_ - 1, 0))];
                const cplx* ph = &phase[si * std::size_t(ny_) * n_];
                for (int iy = 0; iy < ny_; ++iy) {
                    cplx* out = A.col(s.col0 + iy);
                    out[s.col0 + iy] += s.wown;
                    for (int k = iy + 1; k < ny_; ++k) out[s.col0 + k] += pre[k - iy - 1];
                    const cplx* cf = ph + std::size_t(iy) * n_;
                    for (std::uint64_t e = s.pat_begin; e < s.pat_end; ++e) {
                        const cplx* mm = &pat_mom[e * n_];
                        cplx acc = 0.0;
                        for (int aa = 0; aa < n_; ++aa) acc += cf[aa] * mm[aa];
                        out[pat_cell[e]] += acc;
                    }
                }
            }
        });
        return A;
    }

    // y = (R(z)^n) w without materializing the matrix. The fold-phase sums
    // collapse the per-column scatter into one pass over the shared pattern.
    void apply(const cplx* w, cplx* y) const {
        std::fill(y, y + nc, cplx(0));
        std::vector<cplx> sa(n);
        for (std::size_t si = 0; si < samples.size(); ++si) {
            const Sample& s = samples[si];
            const cplx* pre = &wpre[si * std::size_t(std::max(ny - 1, 0))];
            const cplx* ph = &phase[si * std::size_t(ny) * n];
            std::fill(sa.begin(), sa.end(), cplx(0));
            for (int iy = 0; iy < ny; ++iy) {
                cplx cw = w[s.col0 + iy];
                if (cw == cplx(0)) continue;
                y[s.col0 + iy] += s.wown * cw;
                for (int k = iy + 1; k < ny; ++k) y[s.col0 + k] += pre[k - iy - 1] * cw;
                const cplx* cf = ph + std::size_t(iy) * n;
                for (int aa = 0; aa < n; ++aa) sa[aa] += cf[aa] * cw;
            }
            for (std::uint64_t e = s.pat_begin; e < s.pat_end; ++e) {
                const cplx* mm = &pat_mom[e * n];
                cplx acc = 0.0;
                for (int aa = 0; aa < n; ++aa) acc += sa[aa] * mm[aa];
                y[pat_cell[e]] += acc;
            }
        }
    }

    std::vector<cplx> apply(const std::vector<cplx>& w) const {
        std::vector<cplx> y(nc);
        apply(w.data(), y.data());
        return y;
    }
};

inline OperatorMatrix resolvent_power(const SuspensionModel& m, const CellBasis& basis, cplx z,
                                      int n, const ResolventConfig& config = {}) {
    ResolventApplier ap = ResolventApplier::build(m, basis, z, n, config);
    return {ap.to_dense(),
            {n == 1 ? "resolvent" : "resolvent_power",
             {{"z_re", z.real()},
              {"z_im", z.imag()},
              {"n", double(n)},
              {"t_max", ap.t_max},
              {"q", double(config.q)},
              {"path", 0.0}}},
            basis.tag};
}

// Time-quadrature path for R(z). The exact path integrates e^{-zt} in closed
// form over each itinerary segment (no quadrature error in t; the error
// budget is the discarded tail plus the Ulam sampling itself). The
// composite-GL path is the literal panel quadrature of e^{-zt} M(t); its
// point sampling of M makes it strictly noisier and it is kept for
// comparison, with panels sized to resolve the e^{-i Im(z) t} oscillation.
inline OperatorMatrix resolvent_quadrature(const SuspensionModel& m, const CellBasis& basis,
                                           cplx z, const ResolventConfig& config = {}) {
    if (z.real() <= 0) throw input_error("time-quadrature resolvent requires Re z > 0");
    if (config.path == TimePath::Exact) return resolvent_power(m, basis, z, 1, config);
    double T = config.horizon(z);
    double width = std::min(config.panel_cap, kPi / (2.0 * (std::abs(z.imag()) + 1e-9)));
    int panels = std::max(1, static_cast<int>(std::ceil(T / width)));
    double h = T / panels;
    int nc = basis.n_cells();
    OperatorMatrix op{ComplexMatrix(nc, nc),
                      {"resolvent",
                       {{"z_re", z.real()},
                        {"z_im", z.imag()},
                        {"t_max", T},
                        {"panels", double(panels)},
                        {"n_time_nodes", double(config.n_time_nodes)},
                        {"path", 1.0}}},
                      basis.tag};
    auto rule = gauss_legendre(config.n_time_nodes);
    for (int p = 0; p < panels; ++p)
        for (const auto& [node, weight] : rule) {
            double t = p * h + h * (node + 1.0) / 2.0;
            OperatorMatrix mt = assemble_transfer(m, basis, t, config.q);
            op.mat.axpy(weight * h / 2.0 * std::exp(-z * t), mt.mat);
        }
    return op;
}

namespace detail {

// Estimate of the eigenvalue of the pencil behind a factored matrix A that is
// closest to singularity: inverse iteration with the existing factors.
inline cplx dominant_inverse_eigenvalue(const LuFactors& lu, int n, std::uint64_t seed = 5) {
    SplitMix64 rng(seed);
    std::vector<cplx> v(n);
    for (auto& x : v) x = cplx(rng.uniform(-1, 1), rng.uniform(-1, 1));
    double nv = vec_norm2(v);
    for (auto& x : v) x /= nv;
    cplx lambda = 0.0;
    for (int it = 0; it < 25; ++it) {
        std::vector<cplx> w = lu.solve(v);
        cplx num = vec_dot(v, w); // Rayleigh-like quotient for A^{-1}
        lambda = num;
        double nw = vec_norm2(w);
        if (nw == 0.0) break;
        for (int i = 0; i < n; ++i) v[i] = w[i] / nw;
    }
    return lambda;
}

} // namespace detail

// Discrete generator, anchored at one reference resolvent:
//   Z_h := z0 I - R(z0)^{-1}.
// R(z0) is kept factored; Z_h itself is only materialized on demand because
// the inverse can be badly scaled while solves through the factors are fine.
struct GeneratorMatrix {
    cplx z0;
    OperatorMatrix reference; // exact-path R(z0)
    LuFactors lu;             // factors of R(z0)
    std::string basis_tag;

    DiscreteMeasure apply(const DiscreteMeasure& mu) const {
        std::vector<cplx> w = lu.solve(mu.coeffs);
        DiscreteMeasure out{mu.basis_tag, std::move(w)};
        for (std::size_t i = 0; i < out.coeffs.size(); ++i)
            out.coeffs[i] = z0 * mu.coeffs[i] - out.coeffs[i];
        return out;
    }

    ComplexMatrix zh_dense() const {
        ComplexMatrix inv = inverse(reference.mat);
        ComplexMatrix zh = ComplexMatrix::identity(inv.rows());
        zh *= z0;
        zh -= inv;
        return zh;
    }
};

inline GeneratorMatrix build_generator(const SuspensionModel& m, const CellBasis& basis,
                                       ResolventConfig config = {}) {
    cplx z0 = config.reference_z;
    if (z0.real() <= 0) throw input_error("generator anchor requires Re z0 > 0");
    config.path = TimePath::Exact;
    OperatorMatrix ref = resolvent_quadrature(m, basis, z0, config);
    double anorm = tv_opnorm(ref.mat);
    LuFactors lu = lu_factor(ref.mat);
    if (lu.rcond(anorm) < 1e-14)
        throw numeric_error("reference resolvent is numerically singular; raise Re z0");
    return {z0, std::move(ref), std::move(lu), basis.tag};
}

// R(z) from the generator without forming Z_h:
//   (z I - Z_h)^{-1} = ((z - z0) R(z0) + I)^{-1} R(z0),
// one well-scaled dense solve. Near an eigenvalue of Z_h the system becomes
// singular; that proximity is reported together with the eigenvalue estimate.
inline OperatorMatrix resolvent_from_generator(const GeneratorMatrix& gen, cplx z,
                                               double rcond_floor = 1e-8) {
    int n = gen.reference.mat.rows();
    ComplexMatrix A = gen.reference.mat;
    A *= (z - gen.z0);
    for (int i = 0; i < n; ++i) A(i, i) += 1.0;
    double anorm = tv_opnorm(A);
    LuFactors lu = lu_factor(A);
    double rc = lu.rcond(anorm);
    if (rc < rcond_floor) {
        cplx mu = detail::dominant_inverse_eigenvalue(lu, n);
        // A v = ((z - z0) rho + 1) v on an eigenvector of R(z0); recover the
        // generator eigenvalue nu = z0 - 1/rho from the dominant 1/(...)
        cplx rho = (1.0 / mu - 1.0) / (z - gen.z0);
        cplx nu = gen.z0 - 1.0 / rho;
        throw pole_proximity_error("resolvent point is within conditioning floor of a spectral "
                                   "point; nearest eigenvalue estimate attached",
                                   nu);
    }
    OperatorMatrix out{lu.solve(gen.reference.mat),
                       {"resolvent",
                        {{"z_re", z.real()},
                         {"z_im", z.imag()},
                         {"path", 2.0},
                         {"anchor_re", gen.z0.real()},
                         {"anchor_im", gen.z0.imag()},
                         {"rcond", rc}}},
                       gen.basis_tag};
    return out;
}

// Meromorphic continuation from one reference resolvent:
//   R(z0 + 1/eta) = eta R(z0) (eta I + R(z0))^{-1},
// the pseudo-resolvent identity solved for the shifted point. Defined wherever
// -eta stays away from the spectrum of R(z0), including targets with
// Re(z) <= 0 that no time integral reaches.
inline OperatorMatrix continuation(const OperatorMatrix& ref, cplx eta,
                                   double rcond_floor = 1e-8) {
    int n = ref.mat.rows();
    ComplexMatrix A = ref.mat;
    for (int i = 0; i < n; ++i) A(i, i) += eta;
    double anorm = tv_opnorm(A);
    LuFactors lu = lu_factor(A);
    double rc = lu.rcond(anorm);
    cplx z0(0.0, 0.0);
    if (auto it = ref.prov.params.find("z_re"); it != ref.prov.params.end())
        z0 = cplx(it->second, ref.prov.params.at("z_im"));
    if (rc < rcond_floor) {
        cplx mu = detail::dominant_inverse_eigenvalue(lu, n);
        // (R + eta) v = (rho + eta) v; the offending rho = 1/mu - eta
        cplx rho = 1.0 / mu - eta;
        cplx nu = z0 - 1.0 / rho;
        throw pole_proximity_error(
            "continuation parameter is within conditioning floor of the reference spectrum",
            nu);
    }
    ComplexMatrix X = lu.solve(ref.mat);
    X *= eta;
    cplx target = z0 + 1.0 / eta;
    return {std::move(X),
            {"continuation",
             {{"z_re", target.real()},
              {"z_im", target.imag()},
              {"eta_re", eta.real()},
              {"eta_im", eta.imag()},
              {"anchor_re", z0.real()},
              {"anchor_im", z0.imag()},
              {"rcond", rc}}},
            ref.basis_tag};
}

inline OperatorMatrix continuation_to(const OperatorMatrix& ref, cplx z,
                                      double rcond_floor = 1e-8) {
    cplx z0(ref.prov.params.at("z_re"), ref.prov.params.at("z_im"));
    if (z == z0) throw input_error("continuation target coincides with the reference point");
    return continuation(ref, 1.0 / (z - z0), rcond_floor);
}

// ||Z_h mu||-flavored graph norm: d_norm(Z_h mu) + d_norm(mu).
inline double z_norm(const GeneratorMatrix& gen, const DerivativeOps& ops,
                     const DiscreteMeasure& mu) {
    return d_norm(gen.apply(mu), ops) + d_norm(mu, ops);
}

} // namespace sgs
