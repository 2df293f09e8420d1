#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "common.hpp"
#include "linalg.hpp"
#include "model.hpp"
#include "threads.hpp"

namespace sgs {

// Rectangular cells over each branch strip in (x, c) coordinates: n_x columns
// per strip, one global c-grid of n_y rows (shared across strips so leaf rows
// line up across seams). Cell edges follow the leaf (V) and flow (X)
// directions. n_y is the requested base count scaled by the roof maximum, so
// cells stay near-square in physical height.
struct CellBasis {
    int n_strips = 0, n_x = 0, n_y = 0;
    double dc = 0.0;
    std::vector<Interval> strip_x;
    std::vector<double> dx;       // per strip
    std::vector<double> col_area; // physical cell area, per (strip, ix); same for all iy
    std::vector<double> col_rx;   // roof value at column center
    double total_area = 0.0;
    std::string tag;

    static CellBasis build(const SuspensionModel& m, int n_x, int n_y_base) {
        if (n_x < 1 || n_y_base < 1) throw input_error("cell basis needs positive grid sizes");
        CellBasis b;
        b.n_strips = m.base().n_branches();
        b.n_x = n_x;
        b.n_y = std::max(1, static_cast<int>(std::lround(n_y_base * m.roof().r_max())));
        b.dc = 1.0 / b.n_y;
        for (const auto& br : m.base().branches()) {
            b.strip_x.push_back(br.interval);
            b.dx.push_back(br.interval.length() / n_x);
        }
        for (int j = 0; j < b.n_strips; ++j)
            for (int ix = 0; ix < n_x; ++ix) {
                double lo = b.strip_x[j].lo + ix * b.dx[j];
                b.col_area.push_back(b.dc * m.roof().integral(lo, lo + b.dx[j]));
                b.col_rx.push_back(m.roof().eval(lo + 0.5 * b.dx[j]));
            }
        b.total_area = m.roof().integral(0.0, 1.0);
        b.tag = "nx" + std::to_string(n_x) + "ny" + std::to_string(b.n_y);
        return b;
    }

    int n_cells() const { return n_strips * n_x * n_y; }
    int index(int j, int ix, int iy) const { return (j * n_x + ix) * n_y + iy; }
    double area(int cell) const { return col_area[cell / n_y]; }

    int strip_of(double x) const {
        for (int j = 0; j < n_strips; ++j)
            if (x <= strip_x[j].hi + 1e-15) return j;
        return n_strips - 1;
    }
    int locate(double x, double c) const {
        int j = strip_of(x);
        int ix = std::clamp(static_cast<int>((x - strip_x[j].lo) / dx[j]), 0, n_x - 1);
        int iy = std::clamp(static_cast<int>(c / dc), 0, n_y - 1);
        return index(j, ix, iy);
    }
    Interval cell_x(int j, int ix) const {
        double lo = strip_x[j].lo + ix * dx[j];
        return {lo, lo + dx[j]};
    }
    Interval cell_c(int iy) const { return {iy * dc, (iy + 1) * dc}; }
};

struct DiscreteMeasure {
    std::string basis_tag;
    std::vector<cplx> coeffs;

    cplx density(const CellBasis& b, int cell) const { return coeffs[cell] / b.area(cell); }
};

inline void check_basis(const DiscreteMeasure& mu, const CellBasis& b) {
    if (static_cast<int>(mu.coeffs.size()) != b.n_cells())
        throw input_error("measure does not match the cell basis");
}

inline double tv_norm(const DiscreteMeasure& mu) {
    double s = 0.0;
    for (const auto& c : mu.coeffs) s += std::abs(c);
    return s;
}

// bilinear pairing mu(eta) with a discrete test function (one value per cell)
inline cplx pairing(const DiscreteMeasure& mu, const std::vector<cplx>& eta) {
    cplx s = 0.0;
    for (std::size_t i = 0; i < mu.coeffs.size(); ++i) s += eta[i] * mu.coeffs[i];
    return s;
}

inline cplx mass_functional(const DiscreteMeasure& mu) {
    cplx s = 0.0;
    for (const auto& c : mu.coeffs) s += c;
    return s;
}

inline DiscreteMeasure uniform_measure(const CellBasis& b) {
    DiscreteMeasure mu{b.tag, std::vector<cplx>(b.n_cells())};
    for (int i = 0; i < b.n_cells(); ++i) mu.coeffs[i] = b.area(i) / b.total_area;
    return mu;
}

inline DiscreteMeasure random_measure(const CellBasis& b, std::uint64_t seed) {
    SplitMix64 rng(seed);
    DiscreteMeasure mu{b.tag, std::vector<cplx>(b.n_cells())};
    for (auto& c : mu.coeffs) c = cplx(rng.uniform(-1, 1), rng.uniform(-1, 1));
    double s = tv_norm(mu);
    for (auto& c : mu.coeffs) c /= s;
    return mu;
}

struct Provenance {
    std::string kind;
    std::map<std::string, double> params;
};

struct OperatorMatrix {
    ComplexMatrix mat;
    Provenance prov;
    std::string basis_tag;
};

// Visits the cells crossed by the trajectory from (x, c) over [0, T], calling
// visit(cell, t_enter, t_exit). x is constant between returns, so crossing
// times of the c-grid are closed-form and the itinerary is exact in time.
template <class F>
void cell_itinerary(const SuspensionModel& m, const CellBasis& basis, double x, double c, double T,
                    F&& visit) {
    const auto& roof = m.roof();
    double t = 0.0;
    long guard = static_cast<long>(T / roof.r_min()) + 2;
    for (long pass = 0; pass <= guard && t < T; ++pass) {
        int j = basis.strip_of(x);
        int ix = std::clamp(static_cast<int>((x - basis.strip_x[j].lo) / basis.dx[j]), 0,
                            basis.n_x - 1);
        double r = roof.eval(x);
        int iy = std::clamp(static_cast<int>(c / basis.dc), 0, basis.n_y - 1);
        while (iy < basis.n_y && t < T) {
            double c_top = (iy + 1) * basis.dc;
            double t_exit = t + (std::min(c_top, 1.0) - c) * r;
            visit(basis.index(j, ix, iy), t, std::min(t_exit, T));
            t = t_exit;
            c = c_top;
            ++iy;
        }
        x = m.base().eval(x);
        c = 0.0;
    }
}

// Ulam push-forward matrix: column j holds the image masses of cell j under
// the time-t flow, sampled at q x q subcell centers. Deposits are 1/q^2 with
// q a power of two, so column sums are exactly 1.
inline OperatorMatrix assemble_transfer(const SuspensionModel& m, const CellBasis& basis, double t,
                                        int q = 8) {
    if (t < 0) throw input_error("transfer time must be nonnegative");
    int n = basis.n_cells();
    OperatorMatrix op{ComplexMatrix(n, n), {"transfer", {{"t", t}, {"q", double(q)}}}, basis.tag};
    double w = 1.0 / (double(q) * q);
    parallel_for(n, [&](int col) {
        int j = col / (basis.n_x * basis.n_y);
        int ix = (col / basis.n_y) % basis.n_x;
        int iy = col % basis.n_y;
        Interval cx = basis.cell_x(j, ix), cc = basis.cell_c(iy);
        cplx* out = op.mat.col(col);
        for (int a = 0; a < q; ++a)
            for (int b = 0; b < q; ++b) {
                double x = cx.lo + cx.length() * (a + 0.5) / q;
                double c = cc.lo + cc.length() * (b + 0.5) / q;
                auto land = flow_coords(m, {x, c}, t);
                out[basis.locate(land.x, land.c)] += w;
            }
    });
    return op;
}

// Time average (1/s) Integral_0^s M(t) dt. The default path integrates each
// subcell trajectory's occupation time exactly (the itinerary is closed-form),
// so the result has no quadrature error in t and column sums are exactly 1.
// The Gauss-Legendre path averages point-sampled transfer matrices instead;
// it is kept as the literal quadrature form for comparison.
enum class AverageMethod { OccupationExact, GaussLegendre };

inline OperatorMatrix average_operator(const SuspensionModel& m, const CellBasis& basis, double s,
                                       int n_quad = 16,
                                       AverageMethod method = AverageMethod::OccupationExact,
                                       int q = 8) {
    if (s <= 0) throw input_error("averaging window must be positive");
    int n = basis.n_cells();
    if (method == AverageMethod::GaussLegendre) {
        OperatorMatrix op{ComplexMatrix(n, n),
                          {"average", {{"s", s}, {"n_quad", double(n_quad)}, {"gl", 1.0}}},
                          basis.tag};
        for (const auto& [node, weight] : gauss_legendre(n_quad)) {
            double t = s * (node + 1.0) / 2.0;
            OperatorMatrix mt = assemble_transfer(m, basis, t, q);
            op.mat.axpy(weight / 2.0, mt.mat);
        }
        return op;
    }
    OperatorMatrix op{ComplexMatrix(n, n), {"average", {{"s", s}, {"q", double(q)}}}, basis.tag};
    double w = 1.0 / (double(q) * q) / s;
    parallel_for(n, [&](int col) {
        int j = col / (basis.n_x * basis.n_y);
        int ix = (col / basis.n_y) % basis.n_x;
        int iy = col % basis.n_y;
        Interval cx = basis.cell_x(j, ix), cc = basis.cell_c(iy);
        cplx* out = op.mat.col(col);
        for (int a = 0; a < q; ++a)
            for (int b = 0; b < q; ++b) {
                double x = cx.lo + cx.length() * (a + 0.5) / q;
                double c = cc.lo + cc.length() * (b + 0.5) / q;
                cell_itinerary(m, basis, x, c, s, [&](int cell, double t0, double t1) {
                    out[cell] += w * (t1 - t0);
                });
            }
    });
    return op;
}

// Sparse real operator stored by rows; rows need not be sorted.
struct SparseOp {
    int n = 0;
    std::vector<std::vector<std::pair<int, double>>> rows;

    DiscreteMeasure apply(const DiscreteMeasure& mu) const {
        DiscreteMeasure out{mu.basis_tag, std::vector<cplx>(n)};
        for (int i = 0; i < n; ++i) {
            cplx s = 0.0;
            for (const auto& [j, w] : rows[i]) s += w * mu.coeffs[j];
            out.coeffs[i] = s;
        }
        return out;
    }
    std::vector<double> to_dense() const { // column-major n x n
        std::vector<double> d(std::size_t(n) * n, 0.0);
        for (int i = 0; i < n; ++i)
            for (const auto& [j, w] : rows[i]) d[std::size_t(j) * n + i] += w;
        return d;
    }
};

enum class DerivDirection { V, X };

// Discrete derivative along leaves: backward differences of mass-per-unit-x
// along each c-row, crossing strip seams, with the BV boundary jumps at
// x = 0 and x = 1 assigned to the first/last cell. Summation by parts against
// row-difference test functions is exact when the test function vanishes on
// the edge-adjacent cells.
inline SparseOp leaf_derivative_op(const CellBasis& b) {
    SparseOp op{b.n_cells(), std::vector<std::vector<std::pair<int, double>>>(b.n_cells())};
    for (int iy = 0; iy < b.n_y; ++iy) {
        int prev = -1;
        double prev_dx = 0.0;
        for (int j = 0; j < b.n_strips; ++j)
            for (int ix = 0; ix < b.n_x; ++ix) {
                int cell = b.index(j, ix, iy);
                double dxc = b.dx[j];
                if (prev < 0) {
                    op.rows[cell].push_back({cell, 1.0 / dxc});
                } else {
                    double d = 0.5 * (prev_dx + dxc);
                    op.rows[cell].push_back({cell, 1.0 / d});
                    op.rows[cell].push_back({prev, -dxc / (prev_dx * d)});
                }
                if (j == b.n_strips - 1 && ix == b.n_x - 1)
                    op.rows[cell].push_back({cell, -1.0 / dxc});
                prev = cell;
                prev_dx = dxc;
            }
    }
    return op;
}

// Discrete derivative along the flow: backward differences up each cell
// column, with the top cell folding through the roof onto the base-map image
// of its column. The landing weights are the exact x-fractions of the column
// flowing into each target column (computed through the branch inverse), so
// each stencil row is mass-free and summation by parts is exact.
inline SparseOp flow_derivative_op(const SuspensionModel& m, const CellBasis& b) {
    SparseOp op{b.n_cells(), std::vector<std::vector<std::pair<int, double>>>(b.n_cells())};
    for (int j = 0; j < b.n_strips; ++j)
        for (int ix = 0; ix < b.n_x; ++ix) {
            int colbase = (j * b.n_x + ix) * b.n_y;
            double dy = b.dc * b.col_rx[j * b.n_x + ix];
            Interval cx = b.cell_x(j, ix);
            const auto& branch = m.base().branches()[j];
            double x_mid = cx.mid();
            double dy_hop = b.dc * 0.5 * (m.roof().eval(x_mid) + m.roof().eval(branch.map(x_mid)));
            for (int iy = 0; iy < b.n_y; ++iy) {
                // each cell's step length is dy within the column, dy_hop on
                // the roof hop out of the top cell
                double self = (iy == b.n_y - 1) ? 1.0 / dy_hop : 1.0 / dy;
                op.rows[colbase + iy].push_back({colbase + iy, self});
                if (iy > 0) op.rows[colbase + iy].push_back({colbase + iy - 1, -1.0 / dy});
            }
            // mass leaving the top cell lands in row 0 of the image columns
            int top = colbase + b.n_y - 1;
            double fu = branch.map(cx.lo), fv = branch.map(cx.hi);
            if (fu > fv) std::swap(fu, fv);
            double xa = std::min(std::max(fu, 0.0), 1.0), xb = std::min(std::max(fv, 0.0), 1.0);
            for (int j2 = 0; j2 < b.n_strips; ++j2)
                for (int ix2 = 0; ix2 < b.n_x; ++ix2) {
                    Interval tx = b.cell_x(j2, ix2);
                    double lo = std::max(xa, tx.lo), hi = std::min(xb, tx.hi);
                    if (hi <= lo) continue;
                    double ulo = poly_inverse_monotone(branch.map, branch.interval.lo,
                                                       branch.interval.hi, lo);
                    double uhi = poly_inverse_monotone(branch.map, branch.interval.lo,
                                                       branch.interval.hi, hi);
                    double frac = std::abs(uhi - ulo) / cx.length();
                    if (frac <= 0) continue;
                    op.rows[b.index(j2, ix2, 0)].push_back({top, -frac / dy_hop});
                }
        }
    return op;
}

struct DerivativeOps {
    SparseOp dv, dx;
    static DerivativeOps build(const SuspensionModel& m, const CellBasis& b) {
        return {leaf_derivative_op(b), flow_derivative_op(m, b)};
    }
};

inline DiscreteMeasure derivative_measure(const SuspensionModel& m, const CellBasis& b,
                                          const DiscreteMeasure& mu, DerivDirection dir) {
    check_basis(mu, b);
    if (dir == DerivDirection::V) return leaf_derivative_op(b).apply(mu);
    return flow_derivative_op(m, b).apply(mu);
}

inline double d_norm(const DiscreteMeasure& mu, const DerivativeOps& ops) {
    return tv_norm(mu) + tv_norm(ops.dv.apply(mu)) + tv_norm(ops.dx.apply(mu));
}

inline double d_norm(const SuspensionModel& m, const CellBasis& b, const DiscreteMeasure& mu) {
    return d_norm(mu, DerivativeOps::build(m, b));
}

inline DiscreteMeasure apply_matrix(const OperatorMatrix& op, const DiscreteMeasure& mu) {
    DiscreteMeasure out{mu.basis_tag, matvec(op.mat, mu.coeffs)};
    return out;
}

} // namespace sgs
