#pragma once

#include <complex>

#define LAPACK_COMPLEX_CUSTOM
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>

#include <cblas.h>
#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <limits>
#include <vector>

#include "common.hpp"

namespace sgs {

// Dense complex matrix, column-major so LAPACK sees it natively.
class ComplexMatrix {
public:
    ComplexMatrix() = default;
    ComplexMatrix(int rows, int cols) : rows_(rows), cols_(cols), a_(std::size_t(rows) * cols) {}

    static ComplexMatrix identity(int n) {
        ComplexMatrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    cplx& operator()(int i, int j) { return a_[std::size_t(j) * rows_ + i]; }
    const cplx& operator()(int i, int j) const { return a_[std::size_t(j) * rows_ + i]; }
    cplx* data() { return a_.data(); }
    const cplx* data() const { return a_.data(); }
    cplx* col(int j) { return a_.data() + std::size_t(j) * rows_; }
    const cplx* col(int j) const { return a_.data() + std::size_t(j) * rows_; }

    ComplexMatrix& operator+=(const ComplexMatrix& o) {
        for (std::size_t k = 0; k < a_.size(); ++k) a_[k] += o.a_[k];
        return *this;
    }
    ComplexMatrix& operator-=(const ComplexMatrix& o) {
        for (std::size_t k = 0; k < a_.size(); ++k) a_[k] -= o.a_[k];
        return *this;
    }
    ComplexMatrix& operator*=(cplx s) {
        for (auto& v : a_) v *= s;
        return *this;
    }
    // this += s * o
    void axpy(cplx s, const ComplexMatrix& o) {
        for (std::size_t k = 0; k < a_.size(); ++k) a_[k] += s * o.a_[k];
    }

private:
    int rows_ = 0, cols_ = 0;
    std::vector<cplx> a_;
};

inline double vec_norm1(const cplx* x, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::abs(x[i]);
    return s;
}
inline double vec_norm1(const std::vector<cplx>& x) { return vec_norm1(x.data(), x.size()); }

inline double vec_norm2(const cplx* x, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::norm(x[i]);
    return std::sqrt(s);
}
inline double vec_norm2(const std::vector<cplx>& x) { return vec_norm2(x.data(), x.size()); }

inline cplx vec_dot(const cplx* x, const cplx* y, std::size_t n) {
    cplx s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::conj(x[i]) * y[i];
    return s;
}
inline cplx vec_dot(const std::vector<cplx>& x, const std::vector<cplx>& y) {
    return vec_dot(x.data(), y.data(), std::min(x.size(), y.size()));
}

// Operator norm for total variation on measure coordinates: max column l1.
inline double tv_opnorm(const ComplexMatrix& A) {
    double best = 0.0;
    for (int j = 0; j < A.cols(); ++j) best = std::max(best, vec_norm1(A.col(j), A.rows()));
    return best;
}

inline ComplexMatrix matmul(const ComplexMatrix& A, const ComplexMatrix& B) {
    if (A.cols() != B.rows()) throw numeric_error("matmul: shape mismatch");
    ComplexMatrix C(A.rows(), B.cols());
    const cplx one = 1.0, zero = 0.0;
    cblas_zgemm(CblasColMajor, CblasNoTrans, CblasNoTrans, A.rows(), B.cols(), A.cols(),
                &one, A.data(), A.rows(), B.data(), B.rows(), &zero, C.data(), C.rows());
    return C;
}

// y = A x
inline void matvec(const ComplexMatrix& A, const cplx* x, cplx* y) {
    const cplx one = 1.0, zero = 0.0;
    cblas_zgemv(CblasColMajor, CblasNoTrans, A.rows(), A.cols(), &one, A.data(), A.rows(),
                x, 1, &zero, y, 1);
}

inline std::vector<cplx> matvec(const ComplexMatrix& A, const std::vector<cplx>& x) {
    std::vector<cplx> y(A.rows());
    matvec(A, x.data(), y.data());
    return y;
}

struct LuFactors {
    ComplexMatrix lu;
    std::vector<lapack_int> ipiv;

    // b holds nrhs columns of length n, column-major; solved in place.
    void solve_inplace(cplx* b, int nrhs) const {
        lapack_int info = LAPACKE_zgetrs(LAPACK_COL_MAJOR, 'N', lu.rows(), nrhs, lu.data(),
                                         lu.rows(), ipiv.data(), b, lu.rows());
        if (info != 0) throw numeric_error("zgetrs failed");
    }
    std::vector<cplx> solve(std::vector<cplx> b) const {
        solve_inplace(b.data(), 1);
        return b;
    }
    ComplexMatrix solve(ComplexMatrix B) const {
        solve_inplace(B.data(), B.cols());
        return B;
    }

    // Reciprocal 1-norm condition estimate; anorm is the 1-norm of the
    // matrix before factorization.
    double rcond(double anorm) const {
        double rc = 0.0;
        lapack_int info = LAPACKE_zgecon(LAPACK_COL_MAJOR, '1', lu.rows(), lu.data(),
                                         lu.rows(), anorm, &rc);
        if (info != 0) throw numeric_error("zgecon failed");
        return rc;
    }
};

inline LuFactors lu_factor(ComplexMatrix A) {
    if (A.rows() != A.cols()) throw numeric_error("lu_factor: not square");
    LuFactors f;
    f.lu = std::move(A);
    f.ipiv.resize(f.lu.rows());
    lapack_int info = LAPACKE_zgetrf(LAPACK_COL_MAJOR, f.lu.rows(), f.lu.cols(), f.lu.data(),
                                     f.lu.rows(), f.ipiv.data());
    if (info != 0) throw numeric_error("zgetrf failed: matrix singular to working precision");
    return f;
}

inline ComplexMatrix inverse(ComplexMatrix A) {
    LuFactors f = lu_factor(std::move(A));
    lapack_int info = LAPACKE_zgetri(LAPACK_COL_MAJOR, f.lu.rows(), f.lu.data(), f.lu.rows(),
                                     f.ipiv.data());
    if (info != 0) throw numeric_error("zgetri failed");
    return std::move(f.lu);
}

struct EigResult {
    std::vector<cplx> values;
    ComplexMatrix vectors; // right eigenvectors as columns; empty if not requested
};

inline EigResult eig(ComplexMatrix A, bool want_vectors = true) {
    if (A.rows() != A.cols()) throw numeric_error("eig: not square");
    int n = A.rows();
    EigResult r;
    r.values.resize(n);
    if (want_vectors) r.vectors = ComplexMatrix(n, n);
    lapack_int info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', want_vectors ? 'V' : 'N', n,
                                    A.data(), n, r.values.data(), nullptr, 1,
                                    want_vectors ? r.vectors.data() : nullptr, n);
    if (info != 0) throw numeric_error("zgeev failed");
    return r;
}

struct ShiftedEig {
    cplx value;
    std::vector<cplx> vector; // 2-norm 1
    double residual;          // ||A v - value v||_2
};

// Eigenpair of A nearest the shift, by inverse iteration on A - shift I with
// a deterministic start. The eigenvalue is refined each sweep from the
// inverse Rayleigh quotient. When the shift is an exact eigenvalue the
// factorization can hit a hard zero pivot; the shift is then nudged by a few
// ulps, which leaves the converged eigenpair unchanged.
inline ShiftedEig shifted_inverse_eig(const ComplexMatrix& A, cplx shift, int iters = 60,
                                      std::uint64_t seed = 11) {
    int n = A.rows();
    LuFactors lu;
    double nudge = 1e-14 * (1.0 + std::abs(shift));
    for (int attempt = 0;; ++attempt) {
        ComplexMatrix B = A;
        for (int i = 0; i < n; ++i) B(i, i) -= shift;
        try {
            lu = lu_factor(std::move(B));
            break;
        } catch (const numeric_error&) {
            if (attempt >= 4) throw;
            shift += nudge;
            nudge *= 100.0;
        }
    }
    SplitMix64 rng(seed);
    std::vector<cplx> v(n);
    for (auto& x : v) x = cplx(rng.uniform(-1, 1), rng.uniform(-1, 1));
    double nv = vec_norm2(v);
    for (auto& x : v) x /= nv;
    cplx value = shift;
    for (int it = 0; it < iters; ++it) {
        std::vector<cplx> w = lu.solve(v);
        cplx q = vec_dot(v, w); // approx 1/(lambda - shift)
        value = shift + 1.0 / q;
        double nw = vec_norm2(w);
        for (int i = 0; i < n; ++i) v[i] = w[i] / nw;
    }
    std::vector<cplx> av = matvec(A, v);
    for (int i = 0; i < n; ++i) av[i] -= value * v[i];
    return {value, std::move(v), vec_norm2(av)};
}

// SPD solve used by the weak norm: factor once, many right-hand sides.
struct RealCholesky {
    int n = 0;
    std::vector<double> a; // column-major lower factor

    void solve_inplace(double* b, int nrhs) const {
        lapack_int info = LAPACKE_dpotrs(LAPACK_COL_MAJOR, 'L', n, nrhs, a.data(), n, b, n);
        if (info != 0) throw numeric_error("dpotrs failed");
    }
};

inline RealCholesky chol_factor(std::vector<double> A, int n) {
    lapack_int info = LAPACKE_dpotrf(LAPACK_COL_MAJOR, 'L', n, A.data(), n);
    if (info != 0) throw numeric_error("dpotrf failed: matrix not positive definite");
    return RealCholesky{n, std::move(A)};
}

struct RitzPair {
    cplx value;
    std::vector<cplx> vector;
    double residual; // |h_{m+1,m}| * |last component of Ritz y|
};

// Arnoldi with modified Gram-Schmidt and one reorthogonalization pass.
// apply(x, y) must write y = A x for vectors of length n. Returns Ritz pairs
// sorted by descending modulus.
inline std::vector<RitzPair> arnoldi_eigs(const std::function<void(const cplx*, cplx*)>& apply,
                                          std::size_t n, int m, std::uint64_t seed) {
    m = std::min<int>(m, static_cast<int>(n));
    std::vector<std::vector<cplx>> V;
    V.reserve(m + 1);
    {
        SplitMix64 rng(seed);
        std::vector<cplx> v0(n);
        for (auto& v : v0) v = cplx(rng.uniform() - 0.5, rng.uniform() - 0.5);
        double nrm = vec_norm2(v0);
        for (auto& v : v0) v /= nrm;
        V.push_back(std::move(v0));
    }
    ComplexMatrix H(m + 1, m);
    int steps = 0;
    std::vector<cplx> w(n);
    for (int j = 0; j < m; ++j) {
        apply(V[j].data(), w.data());
        for (int pass = 0; pass < 2; ++pass) {
            for (int i = 0; i <= j; ++i) {
                cplx h = vec_dot(V[i].data(), w.data(), n);
                H(i, j) += h;
                for (std::size_t k = 0; k < n; ++k) w[k] -= h * V[i][k];
            }
        }
        double nrm = vec_norm2(w);
        H(j + 1, j) = nrm;
        steps = j + 1;
        if (nrm < 1e-13) break; // invariant subspace reached
        std::vector<cplx> vnext(n);
        for (std::size_t k = 0; k < n; ++k) vnext[k] = w[k] / nrm;
        V.push_back(std::move(vnext));
    }
    ComplexMatrix Hm(steps, steps);
    for (int j = 0; j < steps; ++j)
        for (int i = 0; i < steps; ++i) Hm(i, j) = H(i, j);
    double h_last = std::abs(H(steps, steps - 1));
    EigResult er = eig(std::move(Hm), true);
    std::vector<RitzPair> out(steps);
    for (int k = 0; k < steps; ++k) {
        out[k].value = er.values[k];
        out[k].residual = h_last * std::abs(er.vectors(steps - 1, k));
        out[k].vector.assign(n, 0.0);
        for (int i = 0; i < steps; ++i) {
            cplx y = er.vectors(i, k);
            for (std::size_t p = 0; p < n; ++p) out[k].vector[p] += y * V[i][p];
        }
    }
    std::sort(out.begin(), out.end(),
              [](const RitzPair& a, const RitzPair& b) { return std::abs(a.value) > std::abs(b.value); });
    return out;
}

// Min-cost assignment (Hungarian with potentials). cost is r x c with r <= c;
// returns the assigned column for each row. Sizes here are small (tens).
inline std::vector<int> min_cost_assignment(const std::vector<std::vector<double>>& cost) {
    int r = static_cast<int>(cost.size());
    if (r == 0) return {};
    int c = static_cast<int>(cost[0].size());
    if (r > c) throw numeric_error("min_cost_assignment: more rows than columns");
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(r + 1, 0.0), v(c + 1, 0.0);
    std::vector<int> way(c + 1, 0), match(c + 1, 0); // match[col] = row (1-based)
    for (int i = 1; i <= r; ++i) {
        match[0] = i;
        int j0 = 0;
        std::vector<double> minv(c + 1, inf);
        std::vector<char> used(c + 1, 0);
        do {
            used[j0] = 1;
            int i0 = match[j0], j1 = -1;
            double delta = inf;
            for (int j = 1; j <= c; ++j) {
                if (used[j]) continue;
                double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) { minv[j] = cur; way[j] = j0; }
                if (minv[j] < delta) { delta = minv[j]; j1 = j; }
            }
            for (int j = 0; j <= c; ++j) {
                if (used[j]) { u[match[j]] += delta; v[j] -= delta; }
                else minv[j] -= delta;
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            int j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> row_to_col(r, -1);
    for (int j = 1; j <= c; ++j)
        if (match[j] > 0) row_to_col[match[j] - 1] = j - 1;
    return row_to_col;
}

} // namespace sgs
