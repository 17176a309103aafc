#pragma once

#include "swr/geometry.hpp"
#include "swr/linalg.hpp"
#include "swr/potentials.hpp"

#include <map>
#include <optional>
#include <sstream>

namespace swr {

struct GaussianShape {
    double center = 0.0;
    double delta = 1.0;
    double scale = 1.0;  // prefactor multiplying exp(-delta (x-center)^2)
};

// A one-dimensional factor tabulated on a full axis of the global grid.
struct Factor {
    std::vector<double> value, deriv;
    IndexRange support;                  // outside it the factor is below 1e-13
    std::optional<GaussianShape> gauss;  // analytic metadata when available
    std::string label;
};

inline Factor gaussian_factor(const Axis& ax, double center, double delta, double scale = 1.0) {
    Factor f;
    f.gauss = GaussianShape{center, delta, scale};
    f.value.resize(ax.n);
    f.deriv.resize(ax.n);
    int lo = ax.n, hi = -1;
    for (int i = 0; i < ax.n; ++i) {
        const double d = ax.x(i) - center;
        const double v = scale * std::exp(-delta * d * d);
        f.value[i] = v;
        f.deriv[i] = -2.0 * delta * d * v;
        if (std::abs(v) > 1e-13) {
            lo = std::min(lo, i);
            hi = std::max(hi, i);
        }
    }
    f.support = {lo, hi};
    std::ostringstream os;
    os << "g(" << center << ';' << delta << ')';
    f.label = os.str();
    return f;
}

// Fourth-order central differences, lower order near the axis ends.
inline std::vector<double> grid_derivative(const std::vector<double>& v, double h) {
    const int n = static_cast<int>(v.size());
    std::vector<double> d(n, 0.0);
    for (int i = 0; i < n; ++i) {
        if (i >= 2 && i + 2 < n)
            d[i] = (v[i - 2] - 8.0 * v[i - 1] + 8.0 * v[i + 1] - v[i + 2]) / (12.0 * h);
        else if (i >= 1 && i + 1 < n)
            d[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
        else if (i == 0)
            d[i] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
        else
            d[i] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
    }
    return d;
}

inline Factor tabulated_factor(const Axis& ax, std::vector<double> values, IndexRange support, std::string label) {
    require(static_cast<int>(values.size()) == ax.n, "tabulated factor must cover the whole axis");
    Factor f;
    f.deriv = grid_derivative(values, ax.h());
    f.value = std::move(values);
    // widen by the derivative stencil so the derivative also vanishes outside
    f.support = {std::max(0, support.lo - 2), std::min(ax.n - 1, support.hi + 2)};
    f.label = std::move(label);
    return f;
}

struct BasisTerm {
    double coef = 1.0;
    int f1 = 0, f2 = 0;  // factor indices on the x1 and x2 axes
};

struct BasisFunction {
    std::vector<BasisTerm> terms;
    int l = -1, p = -1;  // generating indices (Gaussian centres or orbitals)
    std::string label;
};

enum class BasisKind { gaussian, slater, gaussian_determinant, augmented };

inline const char* basis_kind_name(BasisKind k) {
    switch (k) {
        case BasisKind::gaussian: return "gaussian";
        case BasisKind::slater: return "slater";
        case BasisKind::gaussian_determinant: return "gaussian-determinant";
        case BasisKind::augmented: return "augmented";
    }
    return "?";
}

struct LocalBasis {
    int subdomain = 1;
    BasisKind kind = BasisKind::gaussian;
    Axis ax1, ax2;
    std::vector<Factor> f1, f2;
    std::vector<BasisFunction> functions;

    int size() const { return static_cast<int>(functions.size()); }

    double value(int l, int i1, int i2) const {
        double v = 0.0;
        for (const auto& t : functions[l].terms) v += t.coef * f1[t.f1].value[i1] * f2[t.f2].value[i2];
        return v;
    }

    // Box containing the supports of all terms of function l.
    std::array<IndexRange, 2> support(int l) const {
        IndexRange r1{ax1.n, -1}, r2{ax2.n, -1};
        for (const auto& t : functions[l].terms) {
            r1 = {std::min(r1.lo, f1[t.f1].support.lo), std::max(r1.hi, f1[t.f1].support.hi)};
            r2 = {std::min(r2.lo, f2[t.f2].support.lo), std::max(r2.hi, f2[t.f2].support.hi)};
        }
        return {r1, r2};
    }

    bool antisymmetric_kind() const { return kind == BasisKind::slater || kind == BasisKind::gaussian_determinant; }

    // Basis of v(x2, x1); living on the mirrored subdomain.
    LocalBasis swapped(int mirrored_subdomain) const {
        require(ax1 == ax2, "swapping electron coordinates needs identical axes");
        LocalBasis b;
        b.subdomain = mirrored_subdomain;
        b.kind = kind;
        b.ax1 = ax2;
        b.ax2 = ax1;
        b.f1 = f2;
        b.f2 = f1;
        b.functions = functions;
        for (auto& fn : b.functions)
            for (auto& t : fn.terms) std::swap(t.f1, t.f2);
        return b;
    }
};

// Factor values or derivatives on an index slice: rows = grid points, cols = factors.
inline MatR factor_matrix(const std::vector<Factor>& fs, IndexRange r, bool derivative = false) {
    MatR m(r.size(), fs.size());
    for (std::size_t k = 0; k < fs.size(); ++k) {
        const auto& src = derivative ? fs[k].deriv : fs[k].value;
        for (int i = 0; i < r.size(); ++i) m(i, k) = src[r.lo + i];
    }
    return m;
}

// Coefficients of the field sum_l c_l v_l in the factor-pair representation.
template <class S>
Mat<S> factor_coefficients(const LocalBasis& b, const Vec<S>& c) {
    require(c.size() == b.size(), "coefficient vector does not match basis size");
    Mat<S> m = Mat<S>::Zero(b.f1.size(), b.f2.size());
    for (int l = 0; l < b.size(); ++l)
        for (const auto& t : b.functions[l].terms) m(t.f1, t.f2) += t.coef * c[l];
    return m;
}

// Inverse direction: sum over terms of a factor-pair matrix, one entry per function.
template <class S>
Vec<S> contract_terms(const LocalBasis& b, const Mat<S>& fp) {
    Vec<S> out(b.size());
    for (int l = 0; l < b.size(); ++l) {
        S s = 0.0;
        for (const auto& t : b.functions[l].terms) s += t.coef * fp(t.f1, t.f2);
        out[l] = s;
    }
    return out;
}

// ---------------------------------------------------------------- 1-d integrals

struct FactorPairIntegrals {
    MatR S;  // int f g
    MatR K;  // int f' g'
    MatR X;  // int x f g
};

namespace detail {
// int_lo^hi moments of exp(-p (x-m)^2): orders 0, 1, 2 about m.
inline std::array<double, 3> gauss_moments(double p, double m, double lo, double hi) {
    const double sp = std::sqrt(p);
    const double el = std::exp(-p * (lo - m) * (lo - m)), eh = std::exp(-p * (hi - m) * (hi - m));
    const double i0 = 0.5 * std::sqrt(pi / p) * (std::erf(sp * (hi - m)) - std::erf(sp * (lo - m)));
    const double i1 = (el - eh) / (2.0 * p);
    const double i2 = i0 / (2.0 * p) + ((lo - m) * el - (hi - m) * eh) / (2.0 * p);
    return {i0, i1, i2};
}

inline void gauss_pair(const GaussianShape& a, const GaussianShape& b, double lo, double hi, double& s, double& k,
                       double& x) {
    const double p = a.delta + b.delta;
    const double m = (a.delta * a.center + b.delta * b.center) / p;
    const double dc = a.center - b.center;
    const double pref = a.scale * b.scale * std::exp(-a.delta * b.delta / p * dc * dc);
    const auto [i0, i1, i2] = gauss_moments(p, m, lo, hi);
    s = pref * i0;
    x = pref * (m * i0 + i1);
    k = 4.0 * a.delta * b.delta * pref *
        (i2 + (2.0 * m - a.center - b.center) * i1 + (m - a.center) * (m - b.center) * i0);
}
}  // namespace detail

// Exact for Gaussian pairs on [x(lo), x(hi)]; trapezoid otherwise.
inline FactorPairIntegrals factor_integrals(const Axis& ax, const std::vector<Factor>& fa, const std::vector<Factor>& fb,
                                            IndexRange range, bool analytic = true) {
    const int na = static_cast<int>(fa.size()), nb = static_cast<int>(fb.size());
    FactorPairIntegrals r{MatR::Zero(na, nb), MatR::Zero(na, nb), MatR::Zero(na, nb)};
    const double lo = ax.x(range.lo), hi = ax.x(range.hi), h = ax.h();
    for (int a = 0; a < na; ++a) {
        for (int b = 0; b < nb; ++b) {
            if (analytic && fa[a].gauss && fb[b].gauss) {
                detail::gauss_pair(*fa[a].gauss, *fb[b].gauss, lo, hi, r.S(a, b), r.K(a, b), r.X(a, b));
                continue;
            }
            const IndexRange ov = range.intersect(fa[a].support).intersect(fb[b].support);
            if (ov.empty()) continue;
            double s = 0, k = 0, x = 0;
            for (int i = ov.lo; i <= ov.hi; ++i) {
                const double w = (i == range.lo || i == range.hi) ? 0.5 * h : h;
                const double fg = fa[a].value[i] * fb[b].value[i];
                s += w * fg;
                k += w * fa[a].deriv[i] * fb[b].deriv[i];
                x += w * ax.x(i) * fg;
            }
            r.S(a, b) = s;
            r.K(a, b) = k;
            r.X(a, b) = x;
        }
    }
    return r;
}

// Overlap (Gram) matrix of a basis over a rectangular slice.
inline MatR gram_matrix(const LocalBasis& b, IndexRange r1, IndexRange r2, bool analytic = true) {
    const auto i1 = factor_integrals(b.ax1, b.f1, b.f1, r1, analytic);
    const auto i2 = factor_integrals(b.ax2, b.f2, b.f2, r2, analytic);
    const int k = b.size();
    MatR a = MatR::Zero(k, k);
    for (int l = 0; l < k; ++l)
        for (int m = l; m < k; ++m) {
            double s = 0.0;
            for (const auto& t : b.functions[l].terms)
                for (const auto& u : b.functions[m].terms) s += t.coef * u.coef * i1.S(t.f1, u.f1) * i2.S(t.f2, u.f2);
            a(l, m) = a(m, l) = s;
        }
    return a;
}

// ---------------------------------------------------------------- Gaussian bases

inline std::vector<double> uniform_centres(double lo, double hi, int n) {
    std::vector<double> c(n);
    const double sp = (hi - lo) / n;
    for (int k = 0; k < n; ++k) c[k] = lo + (k + 0.5) * sp;
    return c;
}

inline void reject_duplicate_centres(const std::vector<double>& c, const std::string& axis) {
    for (std::size_t i = 0; i < c.size(); ++i)
        for (std::size_t j = i + 1; j < c.size(); ++j)
            if (std::abs(c[i] - c[j]) < 1e-12)
                throw Error("duplicate Gaussian centre " + std::to_string(c[i]) + " on axis " + axis +
                            " gives identical basis functions");
}

// Tensor Gaussians exp(-delta (x1-a)^2 - delta (x2-b)^2) on given centre lists.
inline LocalBasis gaussian_basis_from_centres(const GlobalGrid& grid, int subdomain, const std::vector<double>& c1,
                                              const std::vector<double>& c2, double delta) {
    require(delta > 0, "Gaussian width delta must be positive");
    require(!c1.empty() && !c2.empty(), "Gaussian basis needs at least one centre per axis");
    reject_duplicate_centres(c1, "x1");
    reject_duplicate_centres(c2, "x2");
    LocalBasis b;
    b.subdomain = subdomain;
    b.kind = BasisKind::gaussian;
    b.ax1 = grid.x1;
    b.ax2 = grid.x2;
    for (double c : c1) b.f1.push_back(gaussian_factor(grid.x1, c, delta));
    for (double c : c2) b.f2.push_back(gaussian_factor(grid.x2, c, delta));
    for (int a = 0; a < static_cast<int>(c1.size()); ++a)
        for (int q = 0; q < static_cast<int>(c2.size()); ++q) {
            BasisFunction fn;
            fn.terms.push_back({1.0, a, q});
            fn.l = a;
            fn.p = q;
            fn.label = b.f1[a].label + "x" + b.f2[q].label;
            b.functions.push_back(std::move(fn));
        }
    return b;
}

// n_phi^2 Gaussians uniformly spread over the padded (unclipped) subdomain.
inline LocalBasis gaussian_basis(const SubdomainLayout& lay, int subdomain, int n_phi, double delta) {
    require(n_phi >= 1, "gaussian_basis needs n_phi >= 1");
    const auto& d = lay.sub(subdomain);
    return gaussian_basis_from_centres(lay.grid, subdomain, uniform_centres(d.pad1_lo, d.pad1_hi, n_phi),
                                       uniform_centres(d.pad2_lo, d.pad2_hi, n_phi), delta);
}

// Determinants of unit-norm 1-d Gaussians; same centre lists -> pairs l<p,
// different lists -> all cross pairs.
inline LocalBasis gaussian_determinant_basis(const GlobalGrid& grid, int subdomain, const std::vector<double>& ca,
                                             const std::vector<double>& cb, double delta) {
    require(grid.square(), "Gaussian determinants need identical x1 and x2 axes");
    require(delta > 0, "Gaussian width delta must be positive");
    const bool same = ca == cb;
    std::vector<double> all = ca;
    if (!same) all.insert(all.end(), cb.begin(), cb.end());
    reject_duplicate_centres(all, "x1/x2");
    const double norm = std::pow(2.0 * delta / pi, 0.25);
    LocalBasis b;
    b.subdomain = subdomain;
    b.kind = BasisKind::gaussian_determinant;
    b.ax1 = b.ax2 = grid.x1;
    for (double c : all) b.f1.push_back(gaussian_factor(grid.x1, c, delta, norm));
    b.f2 = b.f1;
    const double w = 1.0 / std::sqrt(2.0);
    const int na = static_cast<int>(ca.size()), nb = static_cast<int>(cb.size());
    auto add = [&](int l, int p) {
        require(l != p, "determinant with identical factors vanishes");
        BasisFunction fn;
        fn.terms = {{w, l, p}, {-w, p, l}};
        fn.l = l;
        fn.p = p;
        fn.label = "det(" + b.f1[l].label + "," + b.f1[p].label + ")";
        b.functions.push_back(std::move(fn));
    };
    if (same) {
        for (int l = 0; l < na; ++l)
            for (int p = l + 1; p < na; ++p) add(l, p);
    } else {
        for (int l = 0; l < na; ++l)
            for (int p = 0; p < nb; ++p) add(l, na + p);
    }
    return b;
}

// ---------------------------------------------------------------- local orbitals

struct OrbitalSpec {
    NucleusSet nuclei;
    Mollifier mollifier{0.1, 4};
    bool scale_4pi = false;
    CoulombSmoothing smoothing = CoulombSmoothing::radial;
    BarrierSpec barrier;
    bool mollify = true;
    bool nuclear_potential = true;  // off -> pure barrier well
    int min_points = 4;
};

struct OrbitalSet {
    int block = 1;
    double centre = 0.0;
    IndexRange support;
    std::vector<double> eigenvalues;              // ascending
    std::vector<std::vector<double>> orbitals;    // full-axis tabulations
    std::vector<std::string> diagnostics;
    int size() const { return static_cast<int>(orbitals.size()); }
};

// Lowest eigenpairs of -1/2 (a u')' + V, V = nuclear + barrier, on the
// support [centre - x_b, centre + x_b] with zero Dirichlet ends.
inline OrbitalSet local_orbitals(const Axis& ax, double centre, const OrbitalSpec& spec, int count, int block = 1) {
    spec.barrier.validate();
    spec.nuclei.validate();
    const double h = ax.h();
    if (spec.barrier.eps_b / h < spec.min_points)
        throw Error("grid does not resolve the barrier transition width with " + std::to_string(spec.min_points) +
                    " points (eps_b/h = " + std::to_string(spec.barrier.eps_b / h) + ")");

    OrbitalSet out;
    out.block = block;
    out.centre = centre;
    const double xlo = centre - spec.barrier.x_b, xhi = centre + spec.barrier.x_b;
    int lo = static_cast<int>(std::ceil((xlo - ax.lo) / h - 1e-9));
    int hi = static_cast<int>(std::floor((xhi - ax.lo) / h + 1e-9));
    lo = std::max(lo, 0);
    hi = std::min(hi, ax.n - 1);
    out.support = {lo, hi};
    const int n = hi - lo - 1;  // unknowns strictly inside
    require(n >= 1, "orbital support contains no interior grid points");
    require(count <= n, "requested " + std::to_string(count) + " orbitals but the support has only " +
                            std::to_string(n) + " interior points");

    std::function<double(double)> vnuc = [](double) { return 0.0; };
    if (spec.nuclear_potential && spec.nuclei.size() > 0) {
        const SmoothedCoulomb g(spec.mollifier, spec.scale_4pi, spec.smoothing);
        std::vector<bool> smooth(spec.nuclei.size());
        for (std::size_t a = 0; a < spec.nuclei.size(); ++a) {
            const double xa = spec.nuclei.positions[a];
            smooth[a] = spec.mollify && xa >= xlo - spec.mollifier.eps && xa <= xhi + spec.mollifier.eps;
        }
        if (spec.mollify && 2.0 * spec.mollifier.eps / h < spec.min_points)
            out.diagnostics.push_back("mollifier support 2*eps=" + std::to_string(2 * spec.mollifier.eps) +
                                      " spans fewer than " + std::to_string(spec.min_points) + " grid cells");
        vnuc = [=](double x) {
            double v = 0.0;
            for (std::size_t a = 0; a < spec.nuclei.size(); ++a) {
                const double d = x - spec.nuclei.positions[a];
                if (smooth[a]) {
                    v += spec.nuclei.charges[a] * g(d);
                } else {
                    if (d == 0.0) throw Error("raw Coulomb potential evaluated on a nucleus; enable mollification");
                    v -= spec.nuclei.charges[a] / std::abs(d);
                }
            }
            return v;
        };
    }

    std::vector<double> diag(n), off(std::max(n - 1, 0));
    auto coef = [&](int i) { return a_eps(spec.barrier, ax.lo + (i + 0.5) * h - centre); };  // between i and i+1
    for (int k = 0; k < n; ++k) {
        const int i = lo + 1 + k;
        const double x = ax.x(i);
        diag[k] = 0.5 * (coef(i - 1) + coef(i)) / (h * h) + vnuc(x) + barrier_value(spec.barrier, x - centre);
        if (k + 1 < n) off[k] = -0.5 * coef(i) / (h * h);
    }
    const auto eig = tridiag_eigs(diag, off, count);
    for (int j = 0; j < count; ++j) {
        out.eigenvalues.push_back(eig.values[j]);
        std::vector<double> v(ax.n, 0.0);
        for (int k = 0; k < n; ++k) v[lo + 1 + k] = eig.vectors(k, j) / std::sqrt(h);
        out.orbitals.push_back(std::move(v));
    }
    return out;
}

// Determinants (1/sqrt 2)(phi_l(x1) phi_p(x2) - phi_l(x2) phi_p(x1)).  With
// one orbital set (diagonal block) pairs l<p are used; with two sets the cross
// pairs.  Either way pairs are ordered by eigenvalue sum and the lowest
// `count` kept (all when count <= 0).
inline LocalBasis slater_basis(const GlobalGrid& grid, int subdomain, const OrbitalSet& a, const OrbitalSet* b,
                               int count) {
    require(grid.square(), "Slater determinants need identical x1 and x2 axes");
    require(a.size() > 0 && (!b || b->size() > 0), "orbital sets must be nonempty");
    LocalBasis out;
    out.subdomain = subdomain;
    out.kind = BasisKind::slater;
    out.ax1 = out.ax2 = grid.x1;
    auto push = [&](const OrbitalSet& s) {
        for (int j = 0; j < s.size(); ++j)
            out.f1.push_back(tabulated_factor(grid.x1, s.orbitals[j], s.support,
                                              "phi" + std::to_string(j + 1) + "@" + std::to_string(s.block)));
    };
    push(a);
    const int na = a.size();
    if (b) push(*b);
    out.f2 = out.f1;

    struct Pair {
        double e;
        int l, p;
    };
    std::vector<Pair> pairs;
    if (!b) {
        for (int l = 0; l < na; ++l)
            for (int p = l + 1; p < na; ++p) pairs.push_back({a.eigenvalues[l] + a.eigenvalues[p], l, p});
    } else {
        for (int l = 0; l < na; ++l)
            for (int p = 0; p < b->size(); ++p) pairs.push_back({a.eigenvalues[l] + b->eigenvalues[p], l, na + p});
    }
    std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) { return x.e < y.e; });
    if (count > 0) {
        require(count <= static_cast<int>(pairs.size()),
                "requested " + std::to_string(count) + " determinants but only " + std::to_string(pairs.size()) +
                    " orbital pairs exist");
        pairs.resize(count);
    }
    const double w = 1.0 / std::sqrt(2.0);
    for (const auto& pr : pairs) {
        BasisFunction fn;
        fn.terms = {{w, pr.l, pr.p}, {-w, pr.p, pr.l}};
        fn.l = pr.l;
        fn.p = pr.p;
        fn.label = "lsd(" + out.f1[pr.l].label + "," + out.f1[pr.p].label + ")";
        out.functions.push_back(std::move(fn));
    }
    return out;
}

inline int slater_count(int n_phi) { return n_phi * (n_phi + 1) / 2; }

// ---------------------------------------------------------------- augmentation

struct BoundaryGaussianSpec {
    double delta = 3.0;
    int per_side = 0;  // 0 -> no augmentation
    double drop_ratio = 1e-8;
};

// Adds tensor Gaussians centred on the middle line of every overlap band of
// the subdomain, then drops new functions whose Gram residual relative to the
// current span is below drop_ratio (incremental Cholesky test).
inline LocalBasis augment_basis(const LocalBasis& base, const SubdomainLayout& lay, const BoundaryGaussianSpec& spec) {
    if (spec.per_side <= 0) return base;
    const auto& d = lay.sub(base.subdomain);
    LocalBasis out = base;
    out.kind = BasisKind::augmented;

    std::vector<std::pair<double, double>> centres;
    const auto& edges = lay.edges_of(base.subdomain);
    for (const auto& e : edges) {
        if (e.normal_axis == 0) {
            const double x1 = e.side == Side::left ? d.block1_lo : d.block1_hi;
            for (double x2 : uniform_centres(d.pad2_lo, d.pad2_hi, spec.per_side)) centres.push_back({x1, x2});
        } else {
            const double x2 = e.side == Side::bottom ? d.block2_lo : d.block2_hi;
            for (double x1 : uniform_centres(d.pad1_lo, d.pad1_hi, spec.per_side)) centres.push_back({x1, x2});
        }
    }
    std::sort(centres.begin(), centres.end());
    centres.erase(std::unique(centres.begin(), centres.end(),
                              [](auto& a, auto& b) {
                                  return std::abs(a.first - b.first) < 1e-12 && std::abs(a.second - b.second) < 1e-12;
                              }),
                  centres.end());

    auto factor_index = [](std::vector<Factor>& fs, const Axis& ax, double c, double delta) {
        for (std::size_t k = 0; k < fs.size(); ++k)
            if (fs[k].gauss && std::abs(fs[k].gauss->center - c) < 1e-12 && fs[k].gauss->delta == delta &&
                fs[k].gauss->scale == 1.0)
                return static_cast<int>(k);
        fs.push_back(gaussian_factor(ax, c, delta));
        return static_cast<int>(fs.size()) - 1;
    };
    for (const auto& [c1, c2] : centres) {
        BasisFunction fn;
        fn.terms.push_back({1.0, factor_index(out.f1, out.ax1, c1, spec.delta),
                            factor_index(out.f2, out.ax2, c2, spec.delta)});
        fn.label = "bg(" + std::to_string(c1) + "," + std::to_string(c2) + ")";
        out.functions.push_back(std::move(fn));
    }

    // incremental Cholesky on the Gram matrix over the subdomain
    const MatR g = gram_matrix(out, d.i1, d.i2);
    const int k0 = base.size();
    std::vector<int> keep;
    for (int l = 0; l < k0; ++l) keep.push_back(l);
    MatR chol = MatR::Zero(out.size(), out.size());
    {
        Eigen::LLT<MatR> llt(g.topLeftCorner(k0, k0));
        require(llt.info() == Eigen::Success, "base basis Gram matrix is not positive definite");
        chol.topLeftCorner(k0, k0) = llt.matrixL();
    }
    for (int l = k0; l < out.size(); ++l) {
        const int m = static_cast<int>(keep.size());
        VecR col(m);
        for (int q = 0; q < m; ++q) col[q] = g(keep[q], l);
        VecR y = chol.topLeftCorner(m, m).triangularView<Eigen::Lower>().solve(col);
        const double resid = g(l, l) - y.squaredNorm();
        if (resid <= spec.drop_ratio * g(l, l)) continue;
        chol.block(m, 0, 1, m) = y.transpose();
        chol(m, m) = std::sqrt(resid);
        keep.push_back(l);
    }
    std::vector<BasisFunction> kept;
    for (int l : keep) kept.push_back(out.functions[l]);
    out.functions = std::move(kept);
    return out;
}

// ---------------------------------------------------------------- projection

// Trapezoid inner products <phi0, v_l> over a slice from a tabulation of phi0
// (row-major, x1 slow).
inline VecR project_rhs(const LocalBasis& b, const std::vector<double>& phi0, IndexRange r1, IndexRange r2) {
    require(static_cast<int>(phi0.size()) == r1.size() * r2.size(), "initial data tabulation does not match slice");
    const auto w1 = trapezoid_weights(r1.size(), b.ax1.h());
    const auto w2 = trapezoid_weights(r2.size(), b.ax2.h());
    MatR y(r1.size(), r2.size());
    for (int i = 0; i < r1.size(); ++i)
        for (int j = 0; j < r2.size(); ++j) y(i, j) = w1[i] * w2[j] * phi0[static_cast<std::size_t>(i) * r2.size() + j];
    const MatR fp = factor_matrix(b.f1, r1).transpose() * y * factor_matrix(b.f2, r2);
    return contract_terms<double>(b, fp);
}

struct Projection {
    VecR coefficients;
    double relative_residual = 0.0;
};

inline Projection project_initial(const LocalBasis& b, const MatR& gram, const std::vector<double>& phi0, IndexRange r1,
                                  IndexRange r2, int direct_limit = 1000) {
    require(gram.rows() == b.size() && gram.cols() == b.size(), "Gram matrix does not match basis");
    Eigen::LLT<MatR> llt(gram);
    if (llt.info() != Eigen::Success) throw Error("Gram matrix is singular or indefinite");
    const VecR rhs = project_rhs(b, phi0, r1, r2);
    Projection p;
    p.coefficients = solve_linear<double>(gram, rhs, GmresOptions{}, direct_limit);
    const double bn = rhs.norm();
    p.relative_residual = bn > 0 ? (gram * p.coefficients - rhs).norm() / bn : 0.0;
    return p;
}

inline void dump_basis_csv(std::ostream& os, const LocalBasis& b) {
    os << "index,label,l,p,terms,kind\n";
    for (int l = 0; l < b.size(); ++l)
        os << l << ',' << b.functions[l].label << ',' << b.functions[l].l << ',' << b.functions[l].p << ','
           << b.functions[l].terms.size() << ',' << basis_kind_name(b.kind) << '\n';
}

}  // namespace swr
