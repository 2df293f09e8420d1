#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "common.hpp"
#include "geometry.hpp"
#include "poly.hpp"

namespace sgs {

struct Branch {
    Interval interval;
    Polynomial map;
    bool full = true;
};

// Piecewise-polynomial expanding interval map with full branches. Branch
// intervals partition [0,1]; evaluation at a shared endpoint uses the left
// branch. Monotonicity and full branches are required at construction;
// expansion is measured, not required (verify_expansion reports on it).
class BranchedMap1D {
public:
    explicit BranchedMap1D(std::vector<Branch> branches) : branches_(std::move(branches)) {
        if (branches_.empty()) throw input_error("base map needs at least one branch");
        double tol = 1e-12;
        double prev = 0.0;
        for (const auto& b : branches_) {
            if (std::abs(b.interval.lo - prev) > tol)
                throw input_error("branch intervals must partition [0,1]");
            if (b.interval.length() <= tol) throw input_error("degenerate branch interval");
            prev = b.interval.hi;
        }
        if (std::abs(prev - 1.0) > tol) throw input_error("branch intervals must end at 1");
        min_slope_ = std::numeric_limits<double>::infinity();
        for (const auto& b : branches_) {
            auto [dlo, dhi] = poly_range_on(b.map.derivative(), b.interval.lo, b.interval.hi);
            if (dlo <= 0.0 && dhi >= 0.0)
                throw input_error("branch map must be strictly monotone");
            min_slope_ = std::min(min_slope_, std::min(std::abs(dlo), std::abs(dhi)));
            auto [ilo, ihi] = poly_range_on(b.map, b.interval.lo, b.interval.hi);
            if (ilo < -1e-9 || ihi > 1.0 + 1e-9)
                throw input_error("branch image leaves [0,1]");
            bool covers = ilo <= 1e-9 && ihi >= 1.0 - 1e-9;
            if (!b.full || !covers)
                throw input_error("partial branches are not supported (flow must be globally defined)");
        }
    }

    const std::vector<Branch>& branches() const { return branches_; }
    int n_branches() const { return static_cast<int>(branches_.size()); }
    // inf |f'| - 1 over all branches; negative means not uniformly expanding
    double expansion_margin() const { return min_slope_ - 1.0; }

    // left tie-break: the first branch whose interval contains x
    int branch_index(double x) const {
        for (std::size_t j = 0; j < branches_.size(); ++j)
            if (x <= branches_[j].interval.hi + 1e-15) return static_cast<int>(j);
        return n_branches() - 1;
    }

    double eval(double x) const { return branches_[branch_index(x)].map(x); }
    double deriv(double x) const { return branches_[branch_index(x)].map.derivative()(x); }

    // distance from x to the nearest branch-interval endpoint
    double endpoint_distance(double x) const {
        double d = std::min(std::abs(x - 0.0), std::abs(1.0 - x));
        for (const auto& b : branches_) d = std::min(d, std::abs(x - b.interval.hi));
        return d;
    }

private:
    std::vector<Branch> branches_;
    double min_slope_ = 0.0;
};

struct RoofPiece {
    Interval interval;
    Polynomial poly;
};

// Positive piecewise-polynomial roof, pieces of degree <= 4 so second
// derivatives are exact closed forms.
class RoofFunction {
public:
    explicit RoofFunction(std::vector<RoofPiece> pieces) : pieces_(std::move(pieces)) {
        if (pieces_.empty()) throw input_error("roof needs at least one piece");
        double prev = 0.0, tol = 1e-12;
        r_min_ = std::numeric_limits<double>::infinity();
        r_max_ = 0.0;
        for (const auto& p : pieces_) {
            if (std::abs(p.interval.lo - prev) > tol)
                throw input_error("roof pieces must partition [0,1]");
            prev = p.interval.hi;
            if (p.poly.degree() > 4) throw input_error("roof pieces limited to degree 4");
            auto [lo, hi] = poly_range_on(p.poly, p.interval.lo, p.interval.hi);
            r_min_ = std::min(r_min_, lo);
            r_max_ = std::max(r_max_, hi);
        }
        if (std::abs(prev - 1.0) > tol) throw input_error("roof pieces must end at 1");
        if (r_min_ <= 0.0) throw input_error("roof must be strictly positive");
    }

    const std::vector<RoofPiece>& pieces() const { return pieces_; }
    double r_min() const { return r_min_; }
    double r_max() const { return r_max_; }

    int piece_index(double x) const {
        for (std::size_t j = 0; j < pieces_.size(); ++j)
            if (x <= pieces_[j].interval.hi + 1e-15) return static_cast<int>(j);
        return static_cast<int>(pieces_.size()) - 1;
    }
    double eval(double x) const { return pieces_[piece_index(x)].poly(x); }
    double deriv(double x) const { return pieces_[piece_index(x)].poly.derivative()(x); }

    // exact integral of r over [a,b], split at piece interfaces
    double integral(double a, double b) const {
        double s = 0.0;
        for (const auto& p : pieces_) {
            double lo = std::max(a, p.interval.lo), hi = std::min(b, p.interval.hi);
            if (lo < hi) s += p.poly.integral(lo, hi);
        }
        return s;
    }
    // sup of r over [a,b]
    double sup_on(double a, double b) const {
        double m = 0.0;
        for (const auto& p : pieces_) {
            double lo = std::max(a, p.interval.lo), hi = std::min(b, p.interval.hi);
            if (lo < hi) m = std::max(m, poly_range_on(p.poly, lo, hi).second);
        }
        return m;
    }

private:
    std::vector<RoofPiece> pieces_;
    double r_min_ = 0.0, r_max_ = 0.0;
};

// Builds the chart structure of the suspension: one strip chart per branch in
// roof-normalized coordinates (x, c) with c = height/r(x), plus one gluing
// chart around the branch line. The gluing chart's upper half is the band
// just above the section; its lower half collects the sheets just below the
// roof, parameterized by their landing coordinate under the base map.
// Strip charts overlap their neighbors slightly so that points on the cut
// between adjacent branch rectangles are chart-interior.
inline BranchedSurfaceAtlas induced_atlas(const BranchedMap1D& base, const RoofFunction& roof,
                                          double delta) {
    // the normalized-coordinate construction needs one well-defined height
    // scale along the branch line, so the roof must be continuous there
    for (int j = 0; j + 1 < base.n_branches(); ++j) {
        double x = base.branches()[j].interval.hi;
        double left = roof.pieces()[roof.piece_index(x)].poly(x);
        int pj = roof.piece_index(x);
        double right = (pj + 1 < static_cast<int>(roof.pieces().size()))
                           ? roof.pieces()[pj + 1].poly(x)
                           : left;
        if (std::abs(left - right) > 1e-9)
            throw input_error("roof must be continuous across branch interfaces");
    }

    const double c_lo = 0.15, c_hi = 0.85, eps = 0.4;
    double min_width = 1.0;
    for (const auto& b : base.branches()) min_width = std::min(min_width, b.interval.length());
    const double h = std::min(0.02, min_width / 4.0);

    BranchedSurfaceAtlas atlas;
    int N = base.n_branches();
    atlas.classify_radius = h / 2.0;
    atlas.foliation.delta = delta;
    atlas.foliation.leaf_axis = 'y';
    atlas.foliation.orientation.assign(N + 1, 1);

    // strip charts 0..N-1, one sheet each (subchart id = chart id)
    for (int j = 0; j < N; ++j) {
        const Interval& I = base.branches()[j].interval;
        Rect ball{{std::max(0.0, I.lo - h), std::min(1.0, I.hi + h)}, {c_lo, c_hi}};
        atlas.charts.push_back({j, ball});
        atlas.subcharts.push_back({j, j, {ball}});
    }
    // gluing chart N: sheet N = outgoing band, sheets N+1+j = incoming bands
    Rect glue_ball{{0.0, 1.0}, {-eps, eps}};
    atlas.charts.push_back({N, glue_ball});
    atlas.subcharts.push_back({N, N, {Rect{{0.0, 1.0}, {0.0, eps}}}});
    for (int j = 0; j < N; ++j)
        atlas.subcharts.push_back({N + 1 + j, N, {Rect{{0.0, 1.0}, {-eps, 0.0}}}});

    auto identity_map = [] {
        MapDescriptor1D m;
        m.kind = MapDescriptor1D::Poly;
        m.p = Polynomial({0.0, 1.0});
        return m;
    };

    // seam identities between adjacent strips
    for (int j = 0; j + 1 < N; ++j) {
        double xs = base.branches()[j].interval.hi;
        Rect overlap{{std::max(0.0, xs - h), std::min(1.0, xs + h)}, {c_lo, c_hi}};
        TransitionMap t;
        t.from_chart = j; t.to_chart = j + 1;
        t.from_sheet = j; t.to_sheet = j + 1;
        t.domain = overlap;
        t.x_map = identity_map();
        t.y_a = Polynomial();
        t.y_b = Polynomial::constant(1.0);
        atlas.transitions.push_back(t);
        std::swap(t.from_chart, t.to_chart);
        std::swap(t.from_sheet, t.to_sheet);
        atlas.transitions.push_back(t);
    }
    for (int j = 0; j < N; ++j) {
        const Chart& strip = atlas.charts[j];
        // strip <-> outgoing band (identity on the shared c-range)
        {
            TransitionMap t;
            t.from_chart = j; t.to_chart = N;
            t.from_sheet = j; t.to_sheet = N;
            t.domain = Rect{strip.ball.x, {c_lo, eps}};
            t.x_map = identity_map();
            t.y_a = Polynomial();
            t.y_b = Polynomial::constant(1.0);
            atlas.transitions.push_back(t);
            std::swap(t.from_chart, t.to_chart);
            std::swap(t.from_sheet, t.to_sheet);
            t.domain = Rect{strip.ball.x, {c_lo, eps}};
            atlas.transitions.push_back(t);
        }
        // strip roof side -> incoming band: (x, c) -> (f_j(x), c - 1)
        {
            TransitionMap t;
            t.from_chart = j; t.to_chart = N;
            t.from_sheet = j; t.to_sheet = N + 1 + j;
            t.domain = Rect{base.branches()[j].interval, {1.0 - eps, c_hi}};
            t.x_map.kind = MapDescriptor1D::Poly;
            t.x_map.p = base.branches()[j].map;
            t.y_a = Polynomial::constant(-1.0);
            t.y_b = Polynomial::constant(1.0);
            atlas.transitions.push_back(t);
        }
        // incoming band -> strip roof side: (x, y) -> (f_j^{-1}(x), y + 1)
        {
            TransitionMap t;
            t.from_chart = N; t.to_chart = j;
            t.from_sheet = N + 1 + j; t.to_sheet = j;
            t.domain = Rect{{0.0, 1.0}, {-eps, c_hi - 1.0}};
            t.x_map.kind = MapDescriptor1D::PolyInverse;
            t.x_map.p = base.branches()[j].map;
            t.x_map.inv_interval = base.branches()[j].interval;
            t.y_a = Polynomial::constant(1.0);
            t.y_b = Polynomial::constant(1.0);
            atlas.transitions.push_back(t);
        }
    }
    return atlas;
}

struct JacobianSplit {
    double a_t = 1.0;
    double b_t = 0.0;
    bool valid = true;
};

struct ExpansionReport {
    double lambda_hat = 0.0;
    double c_hat = 1.0;
    double sup_b = 0.0;
    bool pass = false;
    int invalid_samples = 0;
};

class SuspensionModel {
public:
    SuspensionModel(BranchedMap1D base, RoofFunction roof, double lambda_target, double delta)
        : base_(std::move(base)), roof_(std::move(roof)), lambda_target_(lambda_target),
          delta_(delta), atlas_(induced_atlas(base_, roof_, delta)) {
        if (roof_.pieces().size() != static_cast<std::size_t>(base_.n_branches()))
            throw input_error("roof pieces must align with branch intervals");
        for (int j = 0; j < base_.n_branches(); ++j) {
            const auto& bi = base_.branches()[j].interval;
            const auto& ri = roof_.pieces()[j].interval;
            if (std::abs(bi.lo - ri.lo) > 1e-12 || std::abs(bi.hi - ri.hi) > 1e-12)
                throw input_error("roof pieces must align with branch intervals");
        }
        if (delta_ <= 0) throw input_error("delta must be positive");
    }

    const BranchedMap1D& base() const { return base_; }
    const RoofFunction& roof() const { return roof_; }
    const BranchedSurfaceAtlas& atlas() const { return atlas_; }
    double lambda_target() const { return lambda_target_; }
    double delta() const { return delta_; }

    // (x, c): base coordinate and normalized height c = y/r(x) in [0,1)
    struct Coords {
        double x = 0.0, c = 0.0;
    };

    Coords to_coords(const SurfacePoint& p) const {
        int N = base_.n_branches();
        if (p.chart >= 0 && p.chart < N) return {p.x, p.y};
        if (p.chart == N) {
            if (p.sheet == N || p.y >= 0.0) return {p.x, p.y}; // outgoing band
            int j = p.sheet - (N + 1);
            if (j < 0 || j >= N) throw input_error("glue point carries an invalid sheet");
            const auto& br = base_.branches()[j];
            double x = poly_inverse_monotone(br.map, br.interval.lo, br.interval.hi, p.x);
            return {x, p.y + 1.0};
        }
        throw input_error("point does not belong to the suspension atlas");
    }

    SurfacePoint from_coords(Coords q) const {
        int N = base_.n_branches();
        if (q.c >= 1.0) { // fold through the roof
            q.x = base_.eval(q.x);
            q.c -= 1.0;
        }
        const double c_lo = 0.15, c_hi = 0.85;
        if (q.c >= c_lo && q.c <= c_hi) {
            for (int j = 0; j < N; ++j)
                if (atlas_.charts[j].ball.x.contains(q.x)) return {j, q.x, q.c, j};
        }
        if (q.c < 0.5) return {N, q.x, q.c, N};
        int j = base_.branch_index(q.x);
        return {N, base_.branches()[j].map(q.x), q.c - 1.0, N + 1 + j};
    }

private:
    BranchedMap1D base_;
    RoofFunction roof_;
    double lambda_target_;
    double delta_;
    BranchedSurfaceAtlas atlas_;
};

// Exact flow: rise at unit speed to the roof, re-enter at (f(x), 0). Each
// segment is closed-form; the only iteration is over returns.
inline SuspensionModel::Coords flow_coords(const SuspensionModel& m, SuspensionModel::Coords q,
                                           double t) {
    if (t < 0) throw input_error("flow time must be nonnegative");
    const auto& roof = m.roof();
    double r0 = roof.eval(q.x);
    double to_roof = (1.0 - q.c) * r0;
    if (t < to_roof) return {q.x, q.c + t / r0};
    t -= to_roof;
    double x = m.base().eval(q.x);
    long max_iters = static_cast<long>(t / roof.r_min()) + 2;
    for (long i = 0; i < max_iters; ++i) {
        double r = roof.eval(x);
        if (t < r) return {x, t / r};
        t -= r;
        x = m.base().eval(x);
    }
    throw numeric_error("flow: return iteration budget exceeded");
}

inline SurfacePoint flow(const SuspensionModel& m, const SurfacePoint& p, double t) {
    return m.from_coords(flow_coords(m, m.to_coords(resolve_point(m.atlas(), p)), t));
}

// Derivative data of the time-t map in the (leaf, flow) frame. a_t is the
// reciprocal leaf stretch, b_t the shear onto the flow direction:
//   DPhi^t V_p = (1/a_t) V_q + (-b_t/a_t) X_q.
// V is the unit leaf tangent (1, c r'(x)) / norm; X is the unit vertical.
inline JacobianSplit jacobian_split(const SuspensionModel& m, const SurfacePoint& p, double t) {
    auto q = m.to_coords(resolve_point(m.atlas(), p));
    const auto& roof = m.roof();
    const auto& base = m.base();
    JacobianSplit out;
    if (t < 0) throw input_error("jacobian_split: time must be nonnegative");

    // walk the returns, accumulating F' = (f^n)'(x0) and S_n'(x0)
    double x = q.x;
    double Fp = 1.0;   // (f^i)'(x0)
    double Snp = 0.0;  // sum r'(x_i) (f^i)'(x0)
    double r0 = roof.eval(q.x);
    double remaining = t;
    double to_roof = (1.0 - q.c) * r0;
    const double etol = 1e-12;
    if (base.endpoint_distance(q.x) < etol && t > 0) out.valid = false;
    if (remaining >= to_roof) {
        remaining -= to_roof;
        for (;;) {
            if (base.endpoint_distance(x) < etol) { out.valid = false; break; }
            Snp += roof.deriv(x) * Fp;
            Fp *= base.deriv(x);
            x = base.eval(x);
            double r = roof.eval(x);
            if (remaining < r) break;
            remaining -= r;
        }
    }
    if (!out.valid) return {1.0, 0.0, false};

    double cn, xn = x;
    if (t < to_roof) {
        cn = q.c + t / r0;
    } else {
        cn = remaining / roof.eval(xn);
    }
    double rp0 = roof.deriv(q.x), rpn = roof.deriv(xn);
    double Np = std::hypot(1.0, q.c * rp0);
    double Nq = std::hypot(1.0, cn * rpn);
    out.a_t = Np / (Nq * Fp);
    out.b_t = -(q.c * rp0 - Snp - Fp * cn * rpn) / (Fp * Nq);
    return out;
}

// Least-squares fit of sup_p a_t against C e^{-lambda t} over the sample set.
inline ExpansionReport verify_expansion(const SuspensionModel& m, int n_samples,
                                        const std::vector<double>& t_grid,
                                        double tolerance = 0.02, std::uint64_t seed = 1234) {
    ExpansionReport rep;
    SplitMix64 rng(seed);
    std::vector<SuspensionModel::Coords> samples(n_samples);
    for (auto& s : samples) s = {rng.uniform(), rng.uniform()};
    std::vector<double> ts, logsup;
    for (double t : t_grid) {
        double sup_a = 0.0;
        int valid = 0;
        for (const auto& s : samples) {
            SurfacePoint p = m.from_coords(s);
            JacobianSplit js = jacobian_split(m, p, t);
            if (!js.valid) { ++rep.invalid_samples; continue; }
            ++valid;
            sup_a = std::max(sup_a, js.a_t);
            rep.sup_b = std::max(rep.sup_b, std::abs(js.b_t));
        }
        if (valid == 0) throw numeric_error("verify_expansion: no valid samples at t");
        ts.push_back(t);
        logsup.push_back(std::log(sup_a));
    }
    // linear regression log sup = log C - lambda t
    double n = static_cast<double>(ts.size());
    double st = 0, sy = 0, stt = 0, sty = 0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        st += ts[i];
        sy += logsup[i];
        stt += ts[i] * ts[i];
        sty += ts[i] * logsup[i];
    }
    double denom = n * stt - st * st;
    if (std::abs(denom) < 1e-14) throw input_error("verify_expansion: t grid is degenerate");
    double slope = (n * sty - st * sy) / denom;
    double intercept = (sy - slope * st) / n;
    rep.lambda_hat = -slope;
    rep.c_hat = std::exp(intercept);
    rep.pass = rep.lambda_hat >= m.lambda_target() - tolerance;
    return rep;
}

// The suspension's section at c = 0 returns the base map itself.
inline const BranchedMap1D& poincare_section(const SuspensionModel& m) { return m.base(); }

} // namespace sgs
