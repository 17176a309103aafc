#pragma once

#include "swr/basis.hpp"

#include <fstream>

namespace swr {

template <class S> struct GlobalField {
    GlobalGrid grid;
    std::vector<S> values;  // row-major, x1 slow

    GlobalField() = default;
    explicit GlobalField(const GlobalGrid& g) : grid(g), values(g.size(), S(0)) {}

    S& operator()(int i1, int i2) { return values[grid.at(i1, i2)]; }
    const S& operator()(int i1, int i2) const { return values[grid.at(i1, i2)]; }
};

// Sum_ij w_i w_j |f_ij|^2, accumulated row by row in index order.
template <class S> double field_norm2(const GlobalField<S>& f) {
    const auto w1 = trapezoid_weights(f.grid.x1.n, f.grid.x1.h());
    const auto w2 = trapezoid_weights(f.grid.x2.n, f.grid.x2.h());
    double total = 0.0;
    for (int i = 0; i < f.grid.x1.n; ++i) {
        double row = 0.0;
        for (int j = 0; j < f.grid.x2.n; ++j) row += w2[j] * abs2(f(i, j));
        total += w1[i] * row;
    }
    return total;
}

template <class S> double field_norm(const GlobalField<S>& f) { return std::sqrt(field_norm2(f)); }

template <class S> double field_l2_diff(const GlobalField<S>& a, const GlobalField<S>& b) {
    require(a.grid.x1 == b.grid.x1 && a.grid.x2 == b.grid.x2, "field_l2_diff: grid mismatch");
    GlobalField<S> d(a.grid);
    for (std::size_t k = 0; k < d.values.size(); ++k) d.values[k] = a.values[k] - b.values[k];
    return field_norm(d);
}

// Local field on the subdomain slice, rows = x1 points.
template <class S>
Mat<S> local_field(const LocalBasis& b, const Vec<S>& c, IndexRange r1, IndexRange r2) {
    const Mat<S> fc = factor_coefficients<S>(b, c);
    const MatR f1 = factor_matrix(b.f1, r1), f2 = factor_matrix(b.f2, r2);
    return f1.template cast<S>() * fc * f2.transpose().template cast<S>();
}

// Overlap averaging: each grid point takes the mean of the subdomains covering it.
template <class S>
GlobalField<S> reconstruct_global(const SubdomainLayout& lay, const std::vector<LocalBasis>& bases,
                                  const std::vector<Vec<S>>& coeffs) {
    require(static_cast<int>(bases.size()) == lay.count() && static_cast<int>(coeffs.size()) == lay.count(),
            "reconstruct_global: one basis and coefficient set per subdomain required");
    GlobalField<S> g(lay.grid);
    for (const auto& d : lay.subdomains) {
        const Mat<S> loc = local_field<S>(bases[d.index - 1], coeffs[d.index - 1], d.i1, d.i2);
        for (int a = 0; a < d.i1.size(); ++a)
            for (int q = 0; q < d.i2.size(); ++q) g(d.i1.lo + a, d.i2.lo + q) += loc(a, q);
    }
    for (std::size_t k = 0; k < g.values.size(); ++k) {
        const int c = lay.coverage[k];
        if (c == 0) throw Error("reconstruct_global: grid point not covered by any subdomain");
        g.values[k] /= static_cast<double>(c);
    }
    return g;
}

// Pointwise-averaged reconstruction from per-subdomain tabulations.
template <class S>
GlobalField<S> reconstruct_from_tables(const SubdomainLayout& lay, const std::vector<Mat<S>>& locals) {
    GlobalField<S> g(lay.grid);
    for (const auto& d : lay.subdomains) {
        const Mat<S>& loc = locals[d.index - 1];
        require(loc.rows() == d.i1.size() && loc.cols() == d.i2.size(), "local tabulation does not match slice");
        for (int a = 0; a < d.i1.size(); ++a)
            for (int q = 0; q < d.i2.size(); ++q) g(d.i1.lo + a, d.i2.lo + q) += loc(a, q);
    }
    for (std::size_t k = 0; k < g.values.size(); ++k) {
        if (lay.coverage[k] == 0) throw Error("reconstruct: grid point not covered by any subdomain");
        g.values[k] /= static_cast<double>(lay.coverage[k]);
    }
    return g;
}

// f(x1,x2) for x1 > x2, -f(x2,x1) for x1 < x2, zero on the diagonal.
template <class S> GlobalField<S> antisymmetrize_field(const GlobalField<S>& f) {
    if (!f.grid.square()) throw Error("antisymmetrization needs a square grid with identical axes");
    GlobalField<S> out(f.grid);
    const int n = f.grid.x1.n;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i > j)
                out(i, j) = f(i, j);
            else if (i < j)
                out(i, j) = -f(j, i);
        }
    return out;
}

template <class S> double antisymmetry_defect(const GlobalField<S>& f) {
    require(f.grid.square(), "antisymmetry check needs a square grid");
    double m = 0.0;
    for (int i = 0; i < f.grid.x1.n; ++i)
        for (int j = 0; j <= i; ++j) m = std::max(m, std::abs(f(i, j) + f(j, i)));
    return m;
}

// Reconstruction from the lower-triangular blocks (r >= s) of a
// non-overlapping layout; the mirrored blocks carry the swapped bases with
// negated coefficients.  Keys of `bases`/`coeffs` are subdomain indices.
template <class S>
GlobalField<S> antisym_reconstruct(const SubdomainLayout& lay, const std::map<int, LocalBasis>& bases,
                                   const std::map<int, Vec<S>>& coeffs) {
    require(lay.half_cells1 == 0 && lay.half_cells2 == 0,
            "antisymmetric reconstruction requires a non-overlapping layout");
    require(lay.grid.square(), "antisymmetric reconstruction needs identical axes");
    std::vector<Mat<S>> locals(lay.count());
    for (const auto& d : lay.subdomains) {
        if (d.r < d.s) continue;
        auto bi = bases.find(d.index);
        auto ci = coeffs.find(d.index);
        if (bi == bases.end() || ci == coeffs.end())
            throw Error("missing basis or coefficients for subdomain " + std::to_string(d.index));
        locals[d.index - 1] = local_field<S>(bi->second, ci->second, d.i1, d.i2);
        if (d.r > d.s) {
            const int m = lay.sigma_index(d.index, 1, 2);
            const auto& dm = lay.sub(m);
            const LocalBasis mirrored = bi->second.swapped(m);
            const Vec<S> neg = -ci->second;
            locals[m - 1] = local_field<S>(mirrored, neg, dm.i1, dm.i2);
        }
    }
    return reconstruct_from_tables<S>(lay, locals);
}

// Energy 1/2 |grad f|^2 + V |f|^2 with centred differences and trapezoid weights.
template <class S> double energy(const GlobalField<S>& f, const std::vector<double>& potential) {
    const auto& g = f.grid;
    const int n1 = g.x1.n, n2 = g.x2.n;
    const double h1 = g.x1.h(), h2 = g.x2.h();
    const auto w1 = trapezoid_weights(n1, h1);
    const auto w2 = trapezoid_weights(n2, h2);
    const bool has_v = !potential.empty();
    auto d1 = [&](int i, int j) -> S {
        if (i == 0) return (f(1, j) - f(0, j)) / h1;
        if (i == n1 - 1) return (f(n1 - 1, j) - f(n1 - 2, j)) / h1;
        return (f(i + 1, j) - f(i - 1, j)) / (2.0 * h1);
    };
    auto d2 = [&](int i, int j) -> S {
        if (j == 0) return (f(i, 1) - f(i, 0)) / h2;
        if (j == n2 - 1) return (f(i, n2 - 1) - f(i, n2 - 2)) / h2;
        return (f(i, j + 1) - f(i, j - 1)) / (2.0 * h2);
    };
    double total = 0.0;
    for (int i = 0; i < n1; ++i) {
        double row = 0.0;
        for (int j = 0; j < n2; ++j) {
            double e = 0.5 * (abs2(d1(i, j)) + abs2(d2(i, j)));
            if (has_v) e += potential[g.at(i, j)] * abs2(f(i, j));
            row += w2[j] * e;
        }
        total += w1[i] * row;
    }
    return total;
}

template <class S> GlobalField<S> tabulate_field(const GlobalGrid& g, const std::function<S(double, double)>& fn) {
    GlobalField<S> f(g);
    for (int i = 0; i < g.x1.n; ++i)
        for (int j = 0; j < g.x2.n; ++j) f(i, j) = fn(g.x1.x(i), g.x2.x(j));
    return f;
}

// Slice of a global field as a row-major tabulation (x1 slow).
template <class S> std::vector<S> field_slice(const GlobalField<S>& f, IndexRange r1, IndexRange r2) {
    std::vector<S> out;
    out.reserve(static_cast<std::size_t>(r1.size()) * r2.size());
    for (int i = r1.lo; i <= r1.hi; ++i)
        for (int j = r2.lo; j <= r2.hi; ++j) out.push_back(f(i, j));
    return out;
}

// Text header line, then raw row-major doubles (complex: interleaved re,im).
template <class S> void write_grid_binary(const std::string& path, const GlobalField<S>& f) {
    std::ofstream os(path, std::ios::binary);
    require(static_cast<bool>(os), "cannot open " + path);
    os << "swr-grid " << (is_complex_v<S> ? "complex" : "real") << ' ' << f.grid.x1.n << ' ' << f.grid.x2.n << ' '
       << std::setprecision(17) << f.grid.x1.lo << ' ' << f.grid.x1.hi << ' ' << f.grid.x2.lo << ' ' << f.grid.x2.hi
       << '\n';
    os.write(reinterpret_cast<const char*>(f.values.data()), static_cast<std::streamsize>(f.values.size() * sizeof(S)));
}

template <class S> void write_grid_csv(const std::string& path, const GlobalField<S>& f) {
    std::ofstream os(path);
    require(static_cast<bool>(os), "cannot open " + path);
    os << (is_complex_v<S> ? "x1,x2,re,im\n" : "x1,x2,value\n") << std::setprecision(17);
    for (int i = 0; i < f.grid.x1.n; ++i)
        for (int j = 0; j < f.grid.x2.n; ++j) {
            os << f.grid.x1.x(i) << ',' << f.grid.x2.x(j) << ',';
            if constexpr (is_complex_v<S>)
                os << f(i, j).real() << ',' << f(i, j).imag() << '\n';
            else
                os << f(i, j) << '\n';
        }
}

}  // namespace swr
