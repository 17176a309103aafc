#pragma once

#include "swr/core.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <span>

namespace swr {

struct TridiagEigenpairs {
    VecR values;   // ascending
    MatR vectors;  // one unit-norm column per value
};

// Implicitly shifted QL on a symmetric tridiagonal matrix, accumulating the
// rotations so that eigenvectors come out with the eigenvalues.  Returns the
// m lowest pairs, each vector sign-normalized so that its first significant
// entry is positive.
inline TridiagEigenpairs tridiag_eigs(std::span<const double> diag, std::span<const double> offdiag,
                                      int m, int max_sweeps = 60) {
    const int n = static_cast<int>(diag.size());
    require(n >= 1, "tridiag_eigs: empty matrix");
    require(static_cast<int>(offdiag.size()) == n - 1, "tridiag_eigs: off-diagonal must have n-1 entries");
    require(m >= 1 && m <= n, "tridiag_eigs: requested " + std::to_string(m) +
                                   " eigenpairs from a matrix of dimension " + std::to_string(n));

    std::vector<double> d(diag.begin(), diag.end());
    std::vector<double> e(n, 0.0);
    for (int i = 0; i + 1 < n; ++i) e[i] = offdiag[i];
    MatR z = MatR::Identity(n, n);

    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int mm;
        do {
            for (mm = l; mm < n - 1; ++mm) {
                const double dd = std::abs(d[mm]) + std::abs(d[mm + 1]);
                if (std::abs(e[mm]) <= std::numeric_limits<double>::epsilon() * dd) break;
            }
            if (mm != l) {
                if (iter++ == max_sweeps) throw Error("tridiag_eigs: QL iteration did not converge");
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[mm] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                int i;
                for (i = mm - 1; i >= l; --i) {
                    double f = s * e[i];
                    const double b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[mm] = 0.0;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    for (int k = 0; k < n; ++k) {
                        f = z(k, i + 1);
                        z(k, i + 1) = s * z(k, i) + c * f;
                        z(k, i) = c * z(k, i) - s * f;
                    }
                }
                if (r == 0.0 && i >= l) continue;
                d[l] -= p;
                e[l] = g;
                e[mm] = 0.0;
            }
        } while (mm != l);
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return d[a] < d[b]; });

    TridiagEigenpairs out;
    out.values.resize(m);
    out.vectors.resize(n, m);
    for (int j = 0; j < m; ++j) {
        out.values[j] = d[order[j]];
        VecR v = z.col(order[j]);
        v /= v.norm();
        const double vmax = v.cwiseAbs().maxCoeff();
        for (int k = 0; k < n; ++k) {
            if (std::abs(v[k]) > 1e-8 * vmax) {
                if (v[k] < 0) v = -v;
                break;
            }
        }
        out.vectors.col(j) = v;
    }
    return out;
}

template <class S>
Vec<S> solve_direct(const Mat<S>& m, const Vec<S>& b) {
    require(m.rows() == m.cols() && m.rows() == b.size(), "solve_direct: dimension mismatch");
    Eigen::PartialPivLU<Mat<S>> lu(m);
    const double rc = lu.rcond();
    // the rcond estimate misses exactly zero pivots
    const bool zero_pivot = (lu.matrixLU().diagonal().array().abs() == 0.0).any();
    if (zero_pivot || !(rc > 1e3 * std::numeric_limits<double>::epsilon()))
        throw Error("solve_direct: matrix is singular to working precision (rcond=" + std::to_string(rc) + ")");
    return lu.solve(b);
}

struct GmresOptions {
    int restart = 30;
    double tol = 1e-12;
    int max_iter = 500;
};

template <class S> struct GmresResult {
    Vec<S> x;
    int iterations = 0;
    double relative_residual = 0.0;
    bool converged = false;
};

namespace detail {
inline void givens(double a, double b, double& c, double& s) {
    if (b == 0.0) { c = 1.0; s = 0.0; return; }
    const double r = std::hypot(a, b);
    c = a / r;
    s = b / r;
}
inline void givens(cplx a, cplx b, cplx& c, cplx& s) {
    const double na = std::abs(a), nb = std::abs(b);
    if (nb == 0.0) { c = 1.0; s = 0.0; return; }
    if (na == 0.0) { c = 0.0; s = 1.0; return; }
    const double r = std::hypot(na, nb);
    const cplx phase = a / na;
    c = na / r;
    s = std::conj(phase) * b / r;
}
inline double conj_if(double x) { return x; }
inline cplx conj_if(cplx z) { return std::conj(z); }
}  // namespace detail

// Restarted GMRES with Givens-rotation least squares.  No preconditioning.
template <class S>
GmresResult<S> gmres(const Mat<S>& m, const Vec<S>& b, const GmresOptions& opt = {},
                     const Vec<S>* x0 = nullptr) {
    const Eigen::Index n = b.size();
    require(m.rows() == n && m.cols() == n, "gmres: dimension mismatch");
    GmresResult<S> res;
    res.x = x0 ? *x0 : Vec<S>::Zero(n);
    const double bnorm = b.norm();
    if (bnorm == 0.0) {
        res.x.setZero();
        res.converged = true;
        return res;
    }
    const int mr = std::max(1, std::min<int>(opt.restart, static_cast<int>(n)));
    Mat<S> v(n, mr + 1);
    Mat<S> h = Mat<S>::Zero(mr + 1, mr);
    Vec<S> cs(mr), sn(mr), g(mr + 1);

    Vec<S> r = b - m * res.x;
    double rnorm = r.norm();
    while (res.iterations < opt.max_iter) {
        if (rnorm / bnorm <= opt.tol) break;
        v.col(0) = r / rnorm;
        g.setZero();
        g[0] = rnorm;
        h.setZero();
        int j = 0;
        for (; j < mr && res.iterations < opt.max_iter; ++j) {
            ++res.iterations;
            Vec<S> w = m * v.col(j);
            for (int i = 0; i <= j; ++i) {
                h(i, j) = v.col(i).dot(w);  // conjugates the first argument
                w -= h(i, j) * v.col(i);
            }
            const double wn = w.norm();
            h(j + 1, j) = wn;
            if (wn > 0.0) v.col(j + 1) = w / wn;
            for (int i = 0; i < j; ++i) {
                const S t = detail::conj_if(cs[i]) * h(i, j) + detail::conj_if(sn[i]) * h(i + 1, j);
                h(i + 1, j) = -sn[i] * h(i, j) + cs[i] * h(i + 1, j);
                h(i, j) = t;
            }
            detail::givens(h(j, j), h(j + 1, j), cs[j], sn[j]);
            h(j, j) = detail::conj_if(cs[j]) * h(j, j) + detail::conj_if(sn[j]) * h(j + 1, j);
            h(j + 1, j) = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] = detail::conj_if(cs[j]) * g[j];
            if (std::abs(g[j + 1]) / bnorm <= opt.tol || wn == 0.0) {
                ++j;
                break;
            }
        }
        Vec<S> y = h.topLeftCorner(j, j).template triangularView<Eigen::Upper>().solve(g.head(j));
        res.x += v.leftCols(j) * y;
        r = b - m * res.x;
        const double prev = rnorm;
        rnorm = r.norm();
        if (rnorm >= prev && rnorm / bnorm > opt.tol) break;  // stagnation or breakdown
    }
    res.relative_residual = rnorm / bnorm;
    res.converged = res.relative_residual <= opt.tol;
    return res;
}

// GMRES first, dense LU when it does not reach the tolerance and the system is
// small enough for a direct solve.
template <class S>
Vec<S> solve_linear(const Mat<S>& m, const Vec<S>& b, const GmresOptions& opt = {}, int direct_limit = 1000) {
    GmresResult<S> r = gmres<S>(m, b, opt);
    if (r.converged) return r.x;
    if (m.rows() <= direct_limit) {
        Vec<S> x = solve_direct<S>(m, b);
        const double bn = b.norm();
        if (bn == 0.0 || (m * x - b).norm() / bn <= std::max(opt.tol, 1e3 * std::numeric_limits<double>::epsilon()))
            return x;
        // Krylov refinement from the direct solution.
        GmresResult<S> rr = gmres<S>(m, b, opt, &x);
        return rr.x;
    }
    throw Error("solve_linear: GMRES stalled at relative residual " + std::to_string(r.relative_residual));
}

// Sequential summation in the order given; callers pass partial results
// already ordered by subdomain index so the result does not depend on how
// the partials were produced.
inline double deterministic_sum(std::span<const double> parts) {
    double s = 0.0;
    for (double p : parts) s += p;
    return s;
}

template <class S>
S deterministic_dot(std::span<const S> a, std::span<const S> b) {
    require(a.size() == b.size(), "deterministic_dot: length mismatch");
    S s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += detail::conj_if(a[i]) * b[i];
    return s;
}

inline double deterministic_norm(std::span<const double> squared_parts) {
    return std::sqrt(deterministic_sum(squared_parts));
}

inline double spd_condition_number(const MatR& a) {
    Eigen::SelfAdjointEigenSolver<MatR> es(a, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    return lo > 0 ? hi / lo : std::numeric_limits<double>::infinity();
}

inline double min_eigenvalue(const MatR& a) {
    Eigen::SelfAdjointEigenSolver<MatR> es(a, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

// Dense text format: "rows cols" header, then one row per line.
template <class S>
void dump_matrix(std::ostream& os, const Mat<S>& m) {
    os << m.rows() << ' ' << m.cols() << '\n' << std::setprecision(17);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) os << ' ';
            if constexpr (is_complex_v<S>)
                os << m(i, j).real() << ',' << m(i, j).imag();
            else
                os << m(i, j);
        }
        os << '\n';
    }
}

}  // namespace swr
