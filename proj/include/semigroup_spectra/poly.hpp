#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "common.hpp"

namespace sgs {

struct Interval {
    double lo = 0.0, hi = 0.0;
    double length() const { return hi - lo; }
    double mid() const { return 0.5 * (lo + hi); }
    bool contains(double x, double tol = 0.0) const { return x >= lo - tol && x <= hi + tol; }
};

// Dense univariate polynomial, coefficients in ascending degree order.
class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(std::vector<double> coeffs) : c_(std::move(coeffs)) { trim(); }

    static Polynomial constant(double v) { return Polynomial({v}); }

    const std::vector<double>& coeffs() const { return c_; }
    int degree() const { return c_.empty() ? -1 : static_cast<int>(c_.size()) - 1; }

    double operator()(double x) const {
        double acc = 0.0;
        for (std::size_t i = c_.size(); i-- > 0;) acc = acc * x + c_[i];
        return acc;
    }

    Polynomial derivative() const {
        if (c_.size() <= 1) return Polynomial();
        std::vector<double> d(c_.size() - 1);
        for (std::size_t i = 1; i < c_.size(); ++i) d[i - 1] = c_[i] * static_cast<double>(i);
        return Polynomial(std::move(d));
    }

    // Antiderivative with zero constant term.
    Polynomial antiderivative() const {
        std::vector<double> a(c_.size() + 1, 0.0);
        for (std::size_t i = 0; i < c_.size(); ++i) a[i + 1] = c_[i] / static_cast<double>(i + 1);
        return Polynomial(std::move(a));
    }

    double integral(double a, double b) const {
        Polynomial F = antiderivative();
        return F(b) - F(a);
    }

    Polynomial operator+(const Polynomial& o) const {
        std::vector<double> s(std::max(c_.size(), o.c_.size()), 0.0);
        for (std::size_t i = 0; i < c_.size(); ++i) s[i] += c_[i];
        for (std::size_t i = 0; i < o.c_.size(); ++i) s[i] += o.c_[i];
        return Polynomial(std::move(s));
    }

    Polynomial operator*(double k) const {
        std::vector<double> s(c_);
        for (double& v : s) v *= k;
        return Polynomial(std::move(s));
    }

    Polynomial operator*(const Polynomial& o) const {
        if (c_.empty() || o.c_.empty()) return Polynomial();
        std::vector<double> p(c_.size() + o.c_.size() - 1, 0.0);
        for (std::size_t i = 0; i < c_.size(); ++i)
            for (std::size_t j = 0; j < o.c_.size(); ++j) p[i + j] += c_[i] * o.c_[j];
        return Polynomial(std::move(p));
    }

private:
    void trim() {
        while (!c_.empty() && c_.back() == 0.0) c_.pop_back();
    }
    std::vector<double> c_;
};

// Roots of p inside [a,b], located by sign changes of p on a fine grid and
// polished by bisection. Misses only root pairs closer than (b-a)/grid.
inline std::vector<double> poly_roots_in(const Polynomial& p, double a, double b,
                                         int grid = 256) {
    std::vector<double> roots;
    if (p.degree() <= 0) return roots;
    double h = (b - a) / grid;
    double x0 = a, f0 = p(x0);
    for (int k = 1; k <= grid; ++k) {
        double x1 = a + k * h, f1 = p(x1);
        if (f0 == 0.0) roots.push_back(x0);
        if (f0 * f1 < 0.0) {
            double lo = x0, hi = x1, flo = f0;
            for (int it = 0; it < 80; ++it) {
                double m = 0.5 * (lo + hi), fm = p(m);
                if (fm == 0.0) { lo = hi = m; break; }
                if (flo * fm < 0.0) hi = m; else { lo = m; flo = fm; }
            }
            roots.push_back(0.5 * (lo + hi));
        }
        x0 = x1; f0 = f1;
    }
    if (f0 == 0.0) roots.push_back(x0);
    return roots;
}

// min/max of p over [a,b]: endpoints plus interior critical points.
inline std::pair<double, double> poly_range_on(const Polynomial& p, double a, double b) {
    double lo = std::min(p(a), p(b));
    double hi = std::max(p(a), p(b));
    for (double r : poly_roots_in(p.derivative(), a, b)) {
        double v = p(r);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return {lo, hi};
}

// Inverse of a strictly monotone polynomial on [a,b]. Bisection brackets the
// preimage, Newton polishes inside the bracket. v may sit on the boundary of
// the range up to roundoff; it is clamped there.
inline double poly_inverse_monotone(const Polynomial& p, double a, double b, double v) {
    double fa = p(a), fb = p(b);
    bool increasing = fa < fb;
    double vlo = increasing ? fa : fb;
    double vhi = increasing ? fb : fa;
    if (v < vlo || v > vhi) {
        double slack = 1e-9 * (1.0 + std::abs(vlo) + std::abs(vhi));
        if (v < vlo - slack || v > vhi + slack)
            throw numeric_error("poly_inverse_monotone: value outside range");
        v = std::clamp(v, vlo, vhi);
    }
    double lo = a, hi = b;
    for (int it = 0; it < 40; ++it) {
        double m = 0.5 * (lo + hi);
        double fm = p(m);
        if ((fm < v) == increasing) lo = m; else hi = m;
    }
    Polynomial dp = p.derivative();
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 8; ++it) {
        double d = dp(x);
        if (d == 0.0) break;
        double step = (p(x) - v) / d;
        double nx = x - step;
        if (nx < lo || nx > hi) break;
        x = nx;
        if (std::abs(step) < 1e-16 * (1.0 + std::abs(x))) break;
    }
    return x;
}

// Gauss-Legendre nodes and weights on [-1,1]; Newton on the Legendre recurrence.
inline std::vector<std::pair<double, double>> gauss_legendre(int n) {
    std::vector<std::pair<double, double>> nw(n);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1; p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nw[i] = {x, 2.0 / ((1.0 - x * x) * pp * pp)};
    }
    std::sort(nw.begin(), nw.end());
    return nw;
}

} // namespace sgs
