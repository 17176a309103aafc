#pragma once

#include "swr/core.hpp"

#include <algorithm>
#include <cmath>
#include <span>

namespace swr {

struct Axis {
    double lo = 0.0, hi = 1.0;
    int n = 3;

    double h() const { return (hi - lo) / (n - 1); }
    double x(int i) const { return lo + (hi - lo) * static_cast<double>(i) / (n - 1); }
    bool operator==(const Axis&) const = default;
};

// Inclusive index range; empty when hi < lo.
struct IndexRange {
    int lo = 0, hi = -1;

    int size() const { return hi >= lo ? hi - lo + 1 : 0; }
    bool empty() const { return hi < lo; }
    bool contains(int i) const { return i >= lo && i <= hi; }
    IndexRange intersect(const IndexRange& o) const { return {std::max(lo, o.lo), std::min(hi, o.hi)}; }
    bool operator==(const IndexRange&) const = default;
};

struct GlobalGrid {
    Axis x1, x2;

    GlobalGrid() = default;
    GlobalGrid(double a, double b, double c, double d, int n1, int n2) : x1{a, b, n1}, x2{c, d, n2} {
        require(a < b && c < d, "grid bounds must satisfy a < b and c < d");
        require(n1 >= 3 && n2 >= 3, "grid needs at least 3 points per axis");
    }

    const Axis& axis(int k) const { return k == 0 ? x1 : x2; }
    std::size_t size() const { return static_cast<std::size_t>(x1.n) * x2.n; }
    // row-major with x1 slow, x2 fast
    std::size_t at(int i1, int i2) const { return static_cast<std::size_t>(i1) * x2.n + i2; }
    bool square() const { return x1 == x2; }
};

// Composite trapezoid weights on a contiguous run of grid points.
inline std::vector<double> trapezoid_weights(int count, double h) {
    std::vector<double> w(std::max(count, 0), h);
    if (count == 1) {
        w[0] = 0.0;
    } else if (count >= 2) {
        w.front() = 0.5 * h;
        w.back() = 0.5 * h;
    }
    return w;
}

// Trapezoid rule over a tensor slice tabulated row-major (first index slow).
inline double quadrature_2d(std::span<const double> f, int n1, int n2, double h1, double h2) {
    require(static_cast<std::size_t>(n1) * n2 == f.size(), "quadrature_2d: tabulation does not match slice");
    const auto w1 = trapezoid_weights(n1, h1);
    const auto w2 = trapezoid_weights(n2, h2);
    double total = 0.0;
    for (int i = 0; i < n1; ++i) {
        double row = 0.0;
        for (int j = 0; j < n2; ++j) row += w2[j] * f[static_cast<std::size_t>(i) * n2 + j];
        total += w1[i] * row;
    }
    return total;
}

}  // namespace swr
