#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "common.hpp"
#include "poly.hpp"

namespace sgs {

struct Rect {
    Interval x, y;
    bool contains(double px, double py, double tol = 0.0) const {
        return x.contains(px, tol) && y.contains(py, tol);
    }
    bool well_formed() const { return x.lo <= x.hi && y.lo <= y.hi; }
    double diameter() const { return std::hypot(x.length(), y.length()); }
};

inline bool rect_list_contains(const std::vector<Rect>& rects, double px, double py,
                               double tol = 0.0) {
    for (const auto& r : rects)
        if (r.contains(px, py, tol)) return true;
    return false;
}

// A chart carries points of the surface onto a planar ball, realized as a
// closed axis-aligned rectangle.
struct Chart {
    int id = -1;
    Rect ball;
};

// A subchart is one sheet of a chart: the coordinate map restricted to it is
// injective. Its planar image is a finite union of closed rectangles. Sheets
// of the same chart may overlap in the plane; that overlap is the branching.
struct Subchart {
    int id = -1;
    int parent_chart = -1;
    std::vector<Rect> image;
};

// One planar coordinate: either x' = p(x) or x' = p^{-1}(x) with p monotone
// on inv_interval.
struct MapDescriptor1D {
    enum Kind { Poly, PolyInverse } kind = Poly;
    Polynomial p;
    Interval inv_interval; // used by PolyInverse only

    double eval(double x) const {
        if (kind == Poly) return p(x);
        return poly_inverse_monotone(p, inv_interval.lo, inv_interval.hi, x);
    }
    double deriv(double x) const {
        if (kind == Poly) return p.derivative()(x);
        double u = eval(x);
        double d = p.derivative()(u);
        if (d == 0.0) throw numeric_error("inverse map derivative singular");
        return 1.0 / d;
    }
};

// Transition between sheets: x' = g(x), y' = A(x) + B(x) y. The triangular
// form is what keeps the transition compatible with a straightened foliation.
// from_sheet/to_sheet pin down which sheets of the two charts the map relates;
// bare planar coordinates are ambiguous where sheets fold.
struct TransitionMap {
    int from_chart = -1, to_chart = -1;
    int from_sheet = -1, to_sheet = -1;
    Rect domain; // in from-chart coordinates
    MapDescriptor1D x_map;
    Polynomial y_a, y_b; // y' = y_a(x) + y_b(x) * y

    void apply(double x, double y, double& xo, double& yo) const {
        xo = x_map.eval(x);
        yo = y_a(x) + y_b(x) * y;
    }
    // Jacobian [[dxo/dx, 0], [dyo/dx, dyo/dy]]
    void jacobian(double x, double y, double J[2][2]) const {
        J[0][0] = x_map.deriv(x);
        J[0][1] = 0.0;
        J[1][0] = y_a.derivative()(x) + y_b.derivative()(x) * y;
        J[1][1] = y_b(x);
    }
};

// Straightened-foliation convention. leaf_axis names the planar axis carrying
// the leaf label; leaves are the level sets of that coordinate, parameterized
// by the other one. delta is the minimum admissible leaf length.
struct FoliationSpec {
    double delta = 0.1;
    char leaf_axis = 'y';
    std::vector<int> orientation; // per chart, +1 or -1
};

struct BranchedSurfaceAtlas {
    std::vector<Chart> charts;
    std::vector<Subchart> subcharts;
    std::vector<TransitionMap> transitions;
    FoliationSpec foliation;
    double classify_radius = 0.01;

    const Chart* find_chart(int id) const {
        for (const auto& c : charts)
            if (c.id == id) return &c;
        return nullptr;
    }
    const Subchart* find_subchart(int id) const {
        for (const auto& s : subcharts)
            if (s.id == id) return &s;
        return nullptr;
    }
    std::vector<const Subchart*> subcharts_of(int chart_id) const {
        std::vector<const Subchart*> out;
        for (const auto& s : subcharts)
            if (s.parent_chart == chart_id) out.push_back(&s);
        return out;
    }
};

// A surface point is named by a chart, planar coordinates, and the sheet
// (subchart id) it lives on. The sheet matters: distinct points of folded
// sheets share planar coordinates.
struct SurfacePoint {
    int chart = -1;
    double x = 0.0, y = 0.0;
    int sheet = -1;
};

struct TangentVector {
    SurfacePoint base;
    double vx = 0.0, vy = 0.0;
};

enum class PointClass { Interior, Boundary };

struct AxiomWitness {
    int chart = -1, subchart = -1;
    double x = 0.0, y = 0.0;
    std::string note;
};

struct AxiomResult {
    int axiom = 0;
    bool pass = true;
    std::optional<AxiomWitness> witness;
};

struct ValidationReport {
    std::vector<AxiomResult> axioms;
    std::vector<std::string> structural_errors;
    bool orientation_consistent = true;
    std::optional<AxiomWitness> orientation_witness;

    bool structurally_ok() const { return structural_errors.empty(); }
    bool pass() const {
        if (!structural_errors.empty()) return false;
        for (const auto& a : axioms)
            if (!a.pass) return false;
        return true;
    }
};

namespace detail {

inline double point_tol(const Rect& ball) { return 1e-9 * (1.0 + ball.diameter()); }

// Sheet of chart `chart_id` whose image contains (x,y); lowest subchart id
// wins. Returns -1 if none.
inline int containing_sheet(const BranchedSurfaceAtlas& atlas, int chart_id, double x, double y,
                            double tol) {
    int best = -1;
    for (const auto& s : atlas.subcharts) {
        if (s.parent_chart != chart_id) continue;
        if (rect_list_contains(s.image, x, y, tol) && (best < 0 || s.id < best)) best = s.id;
    }
    return best;
}

inline bool same_rep(const SurfacePoint& a, const SurfacePoint& b, double tol) {
    return a.chart == b.chart && a.sheet == b.sheet && std::abs(a.x - b.x) <= tol &&
           std::abs(a.y - b.y) <= tol;
}

} // namespace detail

// Fills in a missing sheet tag (lowest sheet containing the coordinates) and
// verifies membership. Throws input_error when the point is in no sheet.
inline SurfacePoint resolve_point(const BranchedSurfaceAtlas& atlas, SurfacePoint p) {
    const Chart* c = atlas.find_chart(p.chart);
    if (!c) throw input_error("point references unknown chart");
    double tol = detail::point_tol(c->ball);
    if (p.sheet >= 0) {
        const Subchart* s = atlas.find_subchart(p.sheet);
        if (!s || s->parent_chart != p.chart)
            throw input_error("point references a sheet outside its chart");
        if (!rect_list_contains(s->image, p.x, p.y, tol))
            throw input_error("point coordinates outside its sheet image");
        return p;
    }
    int sheet = detail::containing_sheet(atlas, p.chart, p.x, p.y, tol);
    if (sheet < 0) throw input_error("point coordinates outside all sheets of the chart");
    p.sheet = sheet;
    return p;
}

// All representations of a point reachable through recorded transitions
// (breadth-first, bounded depth). The input representation is included.
inline std::vector<SurfacePoint> reps_of(const BranchedSurfaceAtlas& atlas, SurfacePoint p,
                                         int max_hops = 3) {
    p = resolve_point(atlas, p);
    std::vector<SurfacePoint> reps{p};
    std::deque<std::pair<SurfacePoint, int>> queue{{p, 0}};
    while (!queue.empty()) {
        auto [cur, hops] = queue.front();
        queue.pop_front();
        if (hops >= max_hops) continue;
        for (const auto& t : atlas.transitions) {
            if (t.from_chart != cur.chart || t.from_sheet != cur.sheet) continue;
            const Chart* fc = atlas.find_chart(t.from_chart);
            double tol = detail::point_tol(fc->ball);
            if (!t.domain.contains(cur.x, cur.y, tol)) continue;
            SurfacePoint next;
            next.chart = t.to_chart;
            next.sheet = t.to_sheet;
            t.apply(cur.x, cur.y, next.x, next.y);
            const Chart* tc = atlas.find_chart(t.to_chart);
            double ttol = detail::point_tol(tc->ball);
            bool seen = false;
            for (const auto& r : reps)
                if (detail::same_rep(r, next, 10 * ttol)) { seen = true; break; }
            if (!seen) {
                reps.push_back(next);
                queue.emplace_back(next, hops + 1);
            }
        }
    }
    return reps;
}

// Canonical representative: lowest chart id, then lowest sheet id.
inline SurfacePoint canonicalize(const BranchedSurfaceAtlas& atlas, const SurfacePoint& p) {
    auto reps = reps_of(atlas, p);
    const SurfacePoint* best = &reps[0];
    for (const auto& r : reps)
        if (r.chart < best->chart || (r.chart == best->chart && r.sheet < best->sheet))
            best = &r;
    return *best;
}

// Interior iff some representation admits a full planar disk around it inside
// the union of that chart's sheet images.
inline PointClass classify_point(const BranchedSurfaceAtlas& atlas, const SurfacePoint& p) {
    double rad = atlas.classify_radius;
    for (const auto& rep : reps_of(atlas, p)) {
        const Chart* c = atlas.find_chart(rep.chart);
        auto sheets = atlas.subcharts_of(rep.chart);
        double tol = detail::point_tol(c->ball);
        bool disk_ok = true;
        const int n_dirs = 16;
        for (int k = 0; k < n_dirs && disk_ok; ++k) {
            double th = 2.0 * kPi * k / n_dirs;
            for (double frac : {1.0, 0.5}) {
                double qx = rep.x + frac * rad * std::cos(th);
                double qy = rep.y + frac * rad * std::sin(th);
                bool covered = false;
                for (const auto* s : sheets)
                    if (rect_list_contains(s->image, qx, qy, tol)) { covered = true; break; }
                if (!covered) { disk_ok = false; break; }
            }
        }
        if (disk_ok) return PointClass::Interior;
    }
    return PointClass::Boundary;
}

// Carries a tangent vector to another chart through recorded transitions,
// composing the triangular Jacobians along the path.
inline TangentVector translate_tangent(const BranchedSurfaceAtlas& atlas, const TangentVector& v,
                                       int to_chart) {
    SurfacePoint start = resolve_point(atlas, v.base);
    if (start.chart == to_chart) {
        TangentVector out = v;
        out.base = start;
        return out;
    }
    // BFS over (rep, accumulated Jacobian).
    struct Node {
        SurfacePoint p;
        double J[2][2];
        int hops;
    };
    std::deque<Node> queue;
    std::vector<SurfacePoint> visited{start};
    queue.push_back({start, {{1.0, 0.0}, {0.0, 1.0}}, 0});
    while (!queue.empty()) {
        Node cur = queue.front();
        queue.pop_front();
        if (cur.hops >= 4) continue;
        for (const auto& t : atlas.transitions) {
            if (t.from_chart != cur.p.chart || t.from_sheet != cur.p.sheet) continue;
            const Chart* fc = atlas.find_chart(t.from_chart);
            double tol = detail::point_tol(fc->ball);
            if (!t.domain.contains(cur.p.x, cur.p.y, tol)) continue;
            Node next;
            next.p.chart = t.to_chart;
            next.p.sheet = t.to_sheet;
            t.apply(cur.p.x, cur.p.y, next.p.x, next.p.y);
            double Jt[2][2];
            t.jacobian(cur.p.x, cur.p.y, Jt);
            next.J[0][0] = Jt[0][0] * cur.J[0][0] + Jt[0][1] * cur.J[1][0];
            next.J[0][1] = Jt[0][0] * cur.J[0][1] + Jt[0][1] * cur.J[1][1];
            next.J[1][0] = Jt[1][0] * cur.J[0][0] + Jt[1][1] * cur.J[1][0];
            next.J[1][1] = Jt[1][0] * cur.J[0][1] + Jt[1][1] * cur.J[1][1];
            next.hops = cur.hops + 1;
            const Chart* tc = atlas.find_chart(t.to_chart);
            double ttol = detail::point_tol(tc->ball);
            bool seen = false;
            for (const auto& r : visited)
                if (detail::same_rep(r, next.p, 10 * ttol)) { seen = true; break; }
            if (seen) continue;
            if (next.p.chart == to_chart) {
                TangentVector out;
                out.base = next.p;
                out.vx = next.J[0][0] * v.vx + next.J[0][1] * v.vy;
                out.vy = next.J[1][0] * v.vx + next.J[1][1] * v.vy;
                return out;
            }
            visited.push_back(next.p);
            queue.push_back(next);
        }
    }
    throw input_error("translate_tangent: base point has no representation in the target chart");
}

// Chart-coordinate inner product; both vectors must sit in the same chart.
inline double tangent_inner(const TangentVector& u, const TangentVector& v) {
    if (u.base.chart != v.base.chart)
        throw input_error("tangent_inner: vectors in different charts");
    return u.vx * v.vx + u.vy * v.vy;
}

struct Leaf {
    double label = 0.0; // leaf-label coordinate in the seed representation
    std::vector<SurfacePoint> polyline;
    double length = 0.0;
};

namespace detail {

// Extent of the leaf row through (px,py) inside the sheet's rectangle list:
// the connected component of the 1-dim slice containing the parameter value.
inline bool slice_component(const std::vector<Rect>& image, char leaf_axis, double px, double py,
                            double tol, double& lo, double& hi) {
    // collect intervals of the parameter axis at this label
    std::vector<Interval> segs;
    double label = (leaf_axis == 'y') ? py : px;
    double param = (leaf_axis == 'y') ? px : py;
    for (const auto& r : image) {
        const Interval& lab_iv = (leaf_axis == 'y') ? r.y : r.x;
        const Interval& par_iv = (leaf_axis == 'y') ? r.x : r.y;
        if (lab_iv.contains(label, tol)) segs.push_back(par_iv);
    }
    if (segs.empty()) return false;
    std::sort(segs.begin(), segs.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    // merge overlapping segments, then find the one containing param
    std::vector<Interval> merged;
    for (const auto& s : segs) {
        if (!merged.empty() && s.lo <= merged.back().hi + tol)
            merged.back().hi = std::max(merged.back().hi, s.hi);
        else
            merged.push_back(s);
    }
    for (const auto& m : merged) {
        if (m.contains(param, tol)) {
            lo = m.lo;
            hi = m.hi;
            return true;
        }
    }
    return false;
}

inline SurfacePoint at_param(const SurfacePoint& tmpl, char leaf_axis, double param) {
    SurfacePoint q = tmpl;
    if (leaf_axis == 'y') q.x = param; else q.y = param;
    return q;
}

} // namespace detail

// Follows the straightened leaf through p across charts. Marches the
// parameter axis within the seed sheet, hops through transitions at segment
// ends, and stops when no transition continues the leaf. Endpoints are then
// boundary points of the atlas. Length is summed in chart coordinates.
inline Leaf leaf_through(const BranchedSurfaceAtlas& atlas, SurfacePoint p) {
    p = resolve_point(atlas, p);
    char ax = atlas.foliation.leaf_axis;
    Leaf leaf;
    leaf.label = (ax == 'y') ? p.y : p.x;

    auto segment_of = [&](const SurfacePoint& q, double& lo, double& hi) -> bool {
        const Subchart* s = atlas.find_subchart(q.sheet);
        const Chart* c = atlas.find_chart(q.chart);
        return detail::slice_component(s->image, ax, q.x, q.y, detail::point_tol(c->ball), lo, hi);
    };

    // continuation of q through a transition that strictly extends the leaf
    // in the marching direction, or nullopt
    auto hop = [&](const SurfacePoint& q, int dir) -> std::optional<std::pair<SurfacePoint, int>> {
        for (const auto& t : atlas.transitions) {
            if (t.from_chart != q.chart || t.from_sheet != q.sheet) continue;
            const Chart* fc = atlas.find_chart(t.from_chart);
            if (!t.domain.contains(q.x, q.y, detail::point_tol(fc->ball))) continue;
            SurfacePoint next;
            next.chart = t.to_chart;
            next.sheet = t.to_sheet;
            t.apply(q.x, q.y, next.x, next.y);
            double lo, hi;
            if (!segment_of(next, lo, hi)) continue;
            double par = (ax == 'y') ? next.x : next.y;
            // the parameter may reverse orientation across the hop
            double J[2][2];
            t.jacobian(q.x, q.y, J);
            double pd = (ax == 'y') ? J[0][0] : J[1][1];
            int ndir = (pd >= 0) ? dir : -dir;
            double fwd = (ndir > 0) ? hi - par : par - lo;
            if (fwd > 1e-9) return std::make_pair(next, ndir);
        }
        return std::nullopt;
    };

    // march in one direction: dir=+1 toward increasing parameter in the
    // current chart, flipping when a transition reverses orientation
    auto march = [&](SurfacePoint q, int dir, std::vector<SurfacePoint>& out) {
        int budget = 8 * static_cast<int>(atlas.subcharts.size()) + 8;
        double total = 0.0;
        while (budget-- > 0) {
            double lo, hi;
            if (!segment_of(q, lo, hi))
                throw numeric_error("leaf_through: seed not on any leaf slice");
            double par = (ax == 'y') ? q.x : q.y;
            double end = (dir > 0) ? hi : lo;
            total += std::abs(end - par);
            SurfacePoint endpoint = detail::at_param(q, ax, end);
            out.push_back(endpoint);
            auto next = hop(endpoint, dir);
            if (!next) {
                leaf.length += total;
                return;
            }
            q = next->first;
            dir = next->second;
        }
        throw numeric_error("leaf_through: iteration budget exhausted before reaching boundary");
    };

    std::vector<SurfacePoint> fwd, bwd;
    march(p, +1, fwd);
    march(p, -1, bwd);
    std::reverse(bwd.begin(), bwd.end());
    leaf.polyline = std::move(bwd);
    leaf.polyline.push_back(p);
    leaf.polyline.insert(leaf.polyline.end(), fwd.begin(), fwd.end());
    return leaf;
}

// ---- validate_atlas ----------------------------------------------------

namespace detail {

inline void check_structure(const BranchedSurfaceAtlas& atlas, ValidationReport& rep) {
    std::set<int> chart_ids, sub_ids;
    for (const auto& c : atlas.charts) {
        if (!chart_ids.insert(c.id).second)
            rep.structural_errors.push_back("duplicate chart id " + std::to_string(c.id));
    }
    for (const auto& s : atlas.subcharts) {
        if (!sub_ids.insert(s.id).second)
            rep.structural_errors.push_back("duplicate subchart id " + std::to_string(s.id));
        if (!chart_ids.count(s.parent_chart))
            rep.structural_errors.push_back("subchart " + std::to_string(s.id) +
                                            " references unknown chart " +
                                            std::to_string(s.parent_chart));
    }
    for (std::size_t k = 0; k < atlas.transitions.size(); ++k) {
        const auto& t = atlas.transitions[k];
        auto id = std::to_string(k);
        if (!chart_ids.count(t.from_chart) || !chart_ids.count(t.to_chart))
            rep.structural_errors.push_back("transition " + id + " references unknown chart");
        if (!sub_ids.count(t.from_sheet) || !sub_ids.count(t.to_sheet))
            rep.structural_errors.push_back("transition " + id + " references unknown sheet");
    }
    if (!atlas.foliation.orientation.empty() &&
        atlas.foliation.orientation.size() != atlas.charts.size())
        rep.structural_errors.push_back("orientation list size does not match chart count");
    if (atlas.foliation.leaf_axis != 'x' && atlas.foliation.leaf_axis != 'y')
        rep.structural_errors.push_back("foliation leaf_axis must be 'x' or 'y'");
    if (atlas.foliation.delta <= 0)
        rep.structural_errors.push_back("foliation delta must be positive");
}

} // namespace detail

// Checks the six chart axioms on deterministic sample grids. grid_n controls
// the per-subchart sampling density. Structural problems (unresolvable ids)
// are reported separately and skip the axiom checks.
inline ValidationReport validate_atlas(const BranchedSurfaceAtlas& atlas, int grid_n = 64,
                                       std::uint64_t /*seed*/ = 0) {
    ValidationReport rep;
    detail::check_structure(atlas, rep);
    if (!rep.structural_errors.empty()) return rep;

    for (int a = 1; a <= 6; ++a) rep.axioms.push_back({a, true, std::nullopt});
    auto fail = [&](int axiom, AxiomWitness w) {
        auto& ar = rep.axioms[axiom - 1];
        if (ar.pass) {
            ar.pass = false;
            ar.witness = std::move(w);
        }
    };

    // (1) every chart maps onto a well-formed closed planar ball
    for (const auto& c : atlas.charts) {
        if (!c.ball.well_formed() || c.ball.x.length() <= 0 || c.ball.y.length() <= 0)
            fail(1, {c.id, -1, c.ball.x.lo, c.ball.y.lo, "degenerate ball"});
    }

    // (2) every chart carries at least one sheet, and sheet images are
    // nonempty well-formed rectangle lists
    for (const auto& c : atlas.charts) {
        if (atlas.subcharts_of(c.id).empty())
            fail(2, {c.id, -1, 0, 0, "chart has no subcharts"});
    }
    for (const auto& s : atlas.subcharts) {
        if (s.image.empty()) fail(2, {s.parent_chart, s.id, 0, 0, "empty image"});
        for (const auto& r : s.image)
            if (!r.well_formed()) fail(2, {s.parent_chart, s.id, r.x.lo, r.y.lo, "inverted rectangle"});
    }

    // (3) sheet images cover the ball: sampled grid plus corners
    for (const auto& c : atlas.charts) {
        auto sheets = atlas.subcharts_of(c.id);
        double tol = detail::point_tol(c.ball);
        auto covered = [&](double px, double py) {
            for (const auto* s : sheets)
                if (rect_list_contains(s->image, px, py, tol)) return true;
            return false;
        };
        bool bad = false;
        for (int i = 0; i <= grid_n && !bad; ++i) {
            for (int j = 0; j <= grid_n && !bad; ++j) {
                double px = c.ball.x.lo + c.ball.x.length() * i / grid_n;
                double py = c.ball.y.lo + c.ball.y.length() * j / grid_n;
                if (!covered(px, py)) {
                    fail(3, {c.id, -1, px, py, "ball point not covered by any sheet"});
                    bad = true;
                }
            }
        }
    }

    // (5) sheet images are closed subsets of the ball
    for (const auto& s : atlas.subcharts) {
        const Chart* c = atlas.find_chart(s.parent_chart);
        double tol = detail::point_tol(c->ball);
        for (const auto& r : s.image) {
            if (!c->ball.contains(r.x.lo, r.y.lo, tol) || !c->ball.contains(r.x.hi, r.y.hi, tol)) {
                fail(5, {s.parent_chart, s.id, r.x.hi, r.y.hi, "image rectangle leaves the ball"});
                break;
            }
        }
    }

    // (6) recorded transitions: domain inside the source ball, images inside
    // the target sheet, nonsingular triangular derivative, round trips and
    // chained consistency where records overlap, triangular foliation form
    char ax = atlas.foliation.leaf_axis;
    const int tgrid = std::max(4, grid_n / 4);
    for (std::size_t k = 0; k < atlas.transitions.size(); ++k) {
        const auto& t = atlas.transitions[k];
        const Chart* fc = atlas.find_chart(t.from_chart);
        const Chart* tc = atlas.find_chart(t.to_chart);
        const Subchart* ts = atlas.find_subchart(t.to_sheet);
        double ftol = detail::point_tol(fc->ball);
        double ttol = detail::point_tol(tc->ball);
        if (!fc->ball.contains(t.domain.x.lo, t.domain.y.lo, ftol) ||
            !fc->ball.contains(t.domain.x.hi, t.domain.y.hi, ftol)) {
            fail(6, {t.from_chart, t.from_sheet, t.domain.x.lo, t.domain.y.lo,
                     "transition domain leaves the source ball"});
            continue;
        }
        // foliation triangular form: the leaf-label image may depend on the
        // label only. For leaf_axis 'y' that means constant y_a, y_b.
        if (ax == 'y' && (t.y_a.degree() > 0 || t.y_b.degree() > 0))
            fail(6, {t.from_chart, t.from_sheet, 0, 0,
                     "leaf-label map depends on the leaf parameter"});
        bool bad = false;
        for (int i = 0; i <= tgrid && !bad; ++i) {
            for (int j = 0; j <= tgrid && !bad; ++j) {
                double px = t.domain.x.lo + t.domain.x.length() * i / tgrid;
                double py = t.domain.y.lo + t.domain.y.length() * j / tgrid;
                double qx, qy;
                double J[2][2];
                try {
                    t.apply(px, py, qx, qy);
                    t.jacobian(px, py, J);
                } catch (const numeric_error&) {
                    fail(6, {t.from_chart, t.from_sheet, px, py, "transition evaluation failed"});
                    bad = true;
                    continue;
                }
                if (!tc->ball.contains(qx, qy, 100 * ttol) ||
                    !rect_list_contains(ts->image, qx, qy, 100 * ttol)) {
                    fail(6, {t.from_chart, t.from_sheet, px, py,
                             "transition image leaves the target sheet"});
                    bad = true;
                    continue;
                }
                double det = J[0][0] * J[1][1];
                if (std::abs(det) < 1e-9) {
                    fail(6, {t.from_chart, t.from_sheet, px, py, "singular transition derivative"});
                    bad = true;
                    continue;
                }
                // round trip through any recorded inverse
                for (const auto& tb : atlas.transitions) {
                    if (tb.from_chart != t.to_chart || tb.to_chart != t.from_chart ||
                        tb.from_sheet != t.to_sheet || tb.to_sheet != t.from_sheet)
                        continue;
                    if (!tb.domain.contains(qx, qy, ttol)) continue;
                    double bx, by;
                    tb.apply(qx, qy, bx, by);
                    if (std::hypot(bx - px, by - py) > 1e-8 * (1.0 + fc->ball.diameter())) {
                        fail(6, {t.from_chart, t.from_sheet, px, py, "round trip disagrees"});
                        bad = true;
                    }
                    break;
                }
                // cocycle: follow a second hop and compare with a direct record
                for (const auto& t2 : atlas.transitions) {
                    if (bad) break;
                    if (t2.from_chart != t.to_chart || t2.from_sheet != t.to_sheet) continue;
                    if (!t2.domain.contains(qx, qy, ttol)) continue;
                    if (t2.to_chart == t.from_chart) continue; // round trip handled above
                    double cx, cy;
                    t2.apply(qx, qy, cx, cy);
                    for (const auto& td : atlas.transitions) {
                        if (td.from_chart != t.from_chart || td.from_sheet != t.from_sheet ||
                            td.to_chart != t2.to_chart || td.to_sheet != t2.to_sheet)
                            continue;
                        if (!td.domain.contains(px, py, ftol)) continue;
                        double dx, dy;
                        td.apply(px, py, dx, dy);
                        const Chart* cc = atlas.find_chart(t2.to_chart);
                        if (std::hypot(cx - dx, cy - dy) > 1e-8 * (1.0 + cc->ball.diameter())) {
                            fail(6, {t.from_chart, t.from_sheet, px, py,
                                     "chained transitions disagree with the direct record"});
                            bad = true;
                        }
                        break;
                    }
                }
            }
        }
    }

    // (4) every sampled surface point lies in the relative interior of some
    // chart: all nearby sheet points, revealed by any representation, belong
    // to that chart. Membership is decided by translating through recorded
    // transitions.
    {
        const int pgrid = std::max(4, grid_n / 8);
        for (const auto& s : atlas.subcharts) {
            bool done = false;
            for (const auto& r : s.image) {
                if (done) break;
                for (int i = 0; i <= pgrid && !done; ++i) {
                    for (int j = 0; j <= pgrid && !done; ++j) {
                        SurfacePoint p;
                        p.chart = s.parent_chart;
                        p.sheet = s.id;
                        p.x = r.x.lo + r.x.length() * (i + 0.5) / (pgrid + 1);
                        p.y = r.y.lo + r.y.length() * (j + 0.5) / (pgrid + 1);
                        auto reps = reps_of(atlas, p);
                        // collect nearby sheet points across all representations
                        std::vector<SurfacePoint> nears;
                        for (const auto& rp : reps) {
                            const Chart* rc = atlas.find_chart(rp.chart);
                            double rho = 1e-3 * (1.0 + rc->ball.diameter());
                            for (int d = 0; d < 8; ++d) {
                                double th = 2.0 * kPi * d / 8;
                                double qx = rp.x + rho * std::cos(th);
                                double qy = rp.y + rho * std::sin(th);
                                for (const auto& sh : atlas.subcharts) {
                                    if (sh.parent_chart != rp.chart) continue;
                                    if (!rect_list_contains(sh.image, qx, qy, 0.0)) continue;
                                    nears.push_back({rp.chart, qx, qy, sh.id});
                                }
                            }
                        }
                        bool some_chart_interior = false;
                        for (const auto& cand : reps) {
                            bool all_member = true;
                            for (const auto& np : nears) {
                                bool member = false;
                                for (const auto& nrep : reps_of(atlas, np, 2))
                                    if (nrep.chart == cand.chart) { member = true; break; }
                                if (!member) { all_member = false; break; }
                            }
                            if (all_member) { some_chart_interior = true; break; }
                        }
                        if (!some_chart_interior) {
                            fail(4, {s.parent_chart, s.id, p.x, p.y,
                                     "no chart contains a neighborhood of the point"});
                            done = true;
                        }
                    }
                }
            }
        }
    }

    // orientation consistency on sampled overlaps: the leaf-parameter
    // derivative must carry the recorded sign from chart to chart
    if (!atlas.foliation.orientation.empty()) {
        auto orient_of = [&](int chart_id) {
            for (std::size_t i = 0; i < atlas.charts.size(); ++i)
                if (atlas.charts[i].id == chart_id) return atlas.foliation.orientation[i];
            return 1;
        };
        for (const auto& t : atlas.transitions) {
            double px = t.domain.x.mid(), py = t.domain.y.mid();
            double J[2][2];
            try {
                t.jacobian(px, py, J);
            } catch (const numeric_error&) {
                continue; // axiom 6 already witnesses evaluation failures
            }
            double par_deriv = (ax == 'y') ? J[0][0] : J[1][1];
            int want = orient_of(t.to_chart) * orient_of(t.from_chart);
            if (par_deriv * want < 0 && rep.orientation_consistent) {
                rep.orientation_consistent = false;
                rep.orientation_witness = {t.from_chart, t.from_sheet, px, py,
                                           "leaf orientation flips against the recorded signs"};
            }
        }
    }

    return rep;
}

} // namespace sgs
