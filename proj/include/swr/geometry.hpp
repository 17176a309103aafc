#pragma once

#include "swr/grid.hpp"

#include <json.hpp>

#include <array>
#include <optional>
#include <set>

namespace swr {

enum class Side { left, right, bottom, top };
enum class Corner { bottom_left, bottom_right, top_left, top_right };

inline const char* side_name(Side s) {
    switch (s) {
        case Side::left: return "left";
        case Side::right: return "right";
        case Side::bottom: return "bottom";
        case Side::top: return "top";
    }
    return "?";
}

// Overlap request: either an absolute total width per axis, or a fraction of
// the block width.  Fractions are rounded to an even number of grid cells.
struct OverlapSpec {
    std::optional<double> width_x1, width_x2;
    std::optional<double> fraction;
};

struct Subdomain {
    int index = 0;     // 1-based, index = r + L(s-1)
    int r = 1, s = 1;  // x1-block, x2-block (1-based)
    IndexRange i1, i2; // slice of the global grid (clipped at the global boundary)
    // Nominal block [a_r, b_r] x [c_s, d_s] and the unclipped padded rectangle.
    double block1_lo = 0, block1_hi = 0, block2_lo = 0, block2_hi = 0;
    double pad1_lo = 0, pad1_hi = 0, pad2_lo = 0, pad2_hi = 0;

    bool contains(int j1, int j2) const { return i1.contains(j1) && i2.contains(j2); }
};

// One side of a subdomain that lies inside the global rectangle.  The
// transmission data on it is built from the subdomains listed per point.
struct InterfaceEdge {
    Side side = Side::left;
    int normal_axis = 0;       // 0 -> x1 is the normal coordinate
    double normal_sign = -1.0; // outward normal = normal_sign * e_{normal_axis}
    int fixed = 0;             // grid index of the edge line on the normal axis
    IndexRange along;          // grid indices along the edge
    std::vector<std::vector<int>> partners;  // per point of `along`, sorted subdomain indices

    int point_i1(int k) const { return normal_axis == 0 ? fixed : along.lo + k; }
    int point_i2(int k) const { return normal_axis == 0 ? along.lo + k : fixed; }
};

struct InterfaceSegment {
    Side side;
    IndexRange along;
};

class SubdomainLayout {
public:
    GlobalGrid grid;
    int L = 1;
    int half_cells1 = 0, half_cells2 = 0;  // half overlap in grid cells
    double eps1 = 0, eps2 = 0;             // total overlap width after snapping
    std::vector<int> edges1, edges2;       // block edges as grid indices, size L+1
    std::vector<Subdomain> subdomains;
    std::vector<std::vector<InterfaceEdge>> interfaces;  // per subdomain position
    std::vector<unsigned char> coverage;                 // per global point

    int count() const { return static_cast<int>(subdomains.size()); }
    const Subdomain& sub(int index) const {
        require(index >= 1 && index <= count(), "subdomain index out of range: " + std::to_string(index));
        return subdomains[index - 1];
    }
    const std::vector<InterfaceEdge>& edges_of(int index) const { return interfaces[sub(index).index - 1]; }
    int index_of(int r, int s) const { return r + L * (s - 1); }
    int coverage_at(int j1, int j2) const { return coverage[grid.at(j1, j2)]; }

    std::vector<int> containing(int j1, int j2) const {
        std::vector<int> out;
        for (const auto& d : subdomains)
            if (d.contains(j1, j2)) out.push_back(d.index);
        return out;
    }

    // Overlap zone of two subdomains as a pair of index slices (empty when disjoint).
    std::optional<std::array<IndexRange, 2>> overlap_zone(int i, int j) const {
        const auto a = sub(i), b = sub(j);
        const IndexRange r1 = a.i1.intersect(b.i1), r2 = a.i2.intersect(b.i2);
        if (r1.empty() || r2.empty()) return std::nullopt;
        return std::array<IndexRange, 2>{r1, r2};
    }

    // Pieces of the boundary of subdomain i that lie in subdomain j.
    std::vector<InterfaceSegment> interface_segments(int i, int j) const {
        std::vector<InterfaceSegment> out;
        for (const auto& e : edges_of(i)) {
            int start = -1;
            for (int k = 0; k <= e.along.size(); ++k) {
                const bool in = k < e.along.size() &&
                                std::binary_search(e.partners[k].begin(), e.partners[k].end(), j);
                if (in && start < 0) start = k;
                if (!in && start >= 0) {
                    out.push_back({e.side, {e.along.lo + start, e.along.lo + k - 1}});
                    start = -1;
                }
            }
        }
        return out;
    }

    // Neighbours sharing the corner zone of subdomain i; empty unless all three exist.
    std::vector<int> corner_partners(int i, Corner c) const {
        const auto& d = sub(i);
        const int dx = (c == Corner::bottom_right || c == Corner::top_right) ? 1 : -1;
        const int dy = (c == Corner::top_left || c == Corner::top_right) ? 1 : -1;
        const int r2 = d.r + dx, s2 = d.s + dy;
        if (r2 < 1 || r2 > L || s2 < 1 || s2 > L) return {};
        std::vector<int> out{index_of(r2, d.s), index_of(d.r, s2), index_of(r2, s2)};
        std::sort(out.begin(), out.end());
        return out;
    }

    // Block containing the coordinate-swapped point; (1,2) and (2,1) swap r and s.
    int sigma_index(int i, int p, int q) const {
        require((p == 1 || p == 2) && (q == 1 || q == 2), "sigma_index: coordinates must be 1 or 2");
        const auto& d = sub(i);
        if (p == q) return i;
        return index_of(d.s, d.r);
    }

    // Distinct neighbours of subdomain i (any subdomain whose closure meets it).
    std::vector<int> neighbours(int i) const {
        std::set<int> s;
        for (const auto& e : edges_of(i))
            for (const auto& p : e.partners) s.insert(p.begin(), p.end());
        return {s.begin(), s.end()};
    }

    nlohmann::json manifest() const {
        nlohmann::json j;
        j["grid"] = {{"a", grid.x1.lo}, {"b", grid.x1.hi}, {"c", grid.x2.lo}, {"d", grid.x2.hi},
                     {"n_x1", grid.x1.n}, {"n_x2", grid.x2.n}};
        j["L"] = L;
        j["overlap"] = {{"eps_x1", eps1}, {"eps_x2", eps2}, {"half_cells_x1", half_cells1},
                        {"half_cells_x2", half_cells2}};
        j["index_convention"] = "index = r + L*(s-1), r = x1 block, s = x2 block, 1-based";
        for (const auto& d : subdomains) {
            nlohmann::json s;
            s["index"] = d.index;
            s["block"] = {d.r, d.s};
            s["slice_x1"] = {d.i1.lo, d.i1.hi};
            s["slice_x2"] = {d.i2.lo, d.i2.hi};
            s["rect"] = {grid.x1.x(d.i1.lo), grid.x1.x(d.i1.hi), grid.x2.x(d.i2.lo), grid.x2.x(d.i2.hi)};
            for (const auto& e : interfaces[d.index - 1]) {
                s["interfaces"].push_back({{"side", side_name(e.side)},
                                           {"fixed", e.fixed},
                                           {"along", {e.along.lo, e.along.hi}}});
            }
            j["subdomains"].push_back(s);
        }
        return j;
    }
};

namespace detail {
inline int snap(double cells, double tol, const std::string& what) {
    const double r = std::round(cells);
    if (std::abs(cells - r) > tol + 1e-9)
        throw Error("grid too coarse to place " + what + " on a grid line (offset " +
                    std::to_string(std::abs(cells - r)) + " cells)");
    return static_cast<int>(r);
}
}  // namespace detail

inline SubdomainLayout build_layout(const GlobalGrid& grid, int L, const OverlapSpec& ov, double snap_tol = 0.5) {
    require(L >= 1, "layout needs L >= 1");
    SubdomainLayout lay;
    lay.grid = grid;
    lay.L = L;

    for (int ax = 0; ax < 2; ++ax) {
        const Axis& a = grid.axis(ax);
        auto& edges = ax == 0 ? lay.edges1 : lay.edges2;
        edges.resize(L + 1);
        const double block_cells = static_cast<double>(a.n - 1) / L;
        for (int k = 0; k <= L; ++k) edges[k] = detail::snap(k * block_cells, snap_tol, "block edges");
        int min_block = a.n;
        for (int k = 0; k < L; ++k) {
            min_block = std::min(min_block, edges[k + 1] - edges[k]);
            require(edges[k + 1] > edges[k], "grid too coarse: empty block");
        }

        const std::optional<double> width = ax == 0 ? ov.width_x1 : ov.width_x2;
        int half = 0;
        if (L > 1) {
            if (ov.fraction) {
                require(*ov.fraction >= 0, "overlap fraction must be nonnegative");
                const double cells = *ov.fraction * block_cells;
                half = static_cast<int>(std::round(cells / 2.0));
                if (*ov.fraction > 0 && half == 0)
                    throw Error("grid too coarse to resolve the overlap band with two points");
            } else if (width) {
                require(*width >= 0, "overlap width must be nonnegative");
                half = detail::snap(*width / 2.0 / a.h(), snap_tol, "overlap boundaries");
                if (*width > 0 && half == 0) throw Error("grid too coarse to resolve the overlap band with two points");
            }
            if (2 * half >= min_block)
                throw Error("overlap wider than subdomain (" + std::to_string(2 * half) + " cells vs block of " +
                            std::to_string(min_block) + ")");
        }
        (ax == 0 ? lay.half_cells1 : lay.half_cells2) = half;
        (ax == 0 ? lay.eps1 : lay.eps2) = 2 * half * a.h();
    }

    const double w1 = (grid.x1.hi - grid.x1.lo) / L, w2 = (grid.x2.hi - grid.x2.lo) / L;
    for (int s = 1; s <= L; ++s) {
        for (int r = 1; r <= L; ++r) {
            Subdomain d;
            d.index = r + L * (s - 1);
            d.r = r;
            d.s = s;
            d.i1 = {std::max(0, lay.edges1[r - 1] - lay.half_cells1),
                    std::min(grid.x1.n - 1, lay.edges1[r] + lay.half_cells1)};
            d.i2 = {std::max(0, lay.edges2[s - 1] - lay.half_cells2),
                    std::min(grid.x2.n - 1, lay.edges2[s] + lay.half_cells2)};
            d.block1_lo = grid.x1.lo + (r - 1) * w1;
            d.block1_hi = grid.x1.lo + r * w1;
            d.block2_lo = grid.x2.lo + (s - 1) * w2;
            d.block2_hi = grid.x2.lo + s * w2;
            d.pad1_lo = d.block1_lo - 0.5 * lay.eps1;
            d.pad1_hi = d.block1_hi + 0.5 * lay.eps1;
            d.pad2_lo = d.block2_lo - 0.5 * lay.eps2;
            d.pad2_hi = d.block2_hi + 0.5 * lay.eps2;
            lay.subdomains.push_back(d);
        }
    }

    lay.coverage.assign(grid.size(), 0);
    for (const auto& d : lay.subdomains)
        for (int j1 = d.i1.lo; j1 <= d.i1.hi; ++j1)
            for (int j2 = d.i2.lo; j2 <= d.i2.hi; ++j2) ++lay.coverage[grid.at(j1, j2)];

    lay.interfaces.resize(lay.subdomains.size());
    for (const auto& d : lay.subdomains) {
        auto& list = lay.interfaces[d.index - 1];
        auto add = [&](Side side, int axis, double sign, int fixed, IndexRange along) {
            InterfaceEdge e;
            e.side = side;
            e.normal_axis = axis;
            e.normal_sign = sign;
            e.fixed = fixed;
            e.along = along;
            for (int k = 0; k < along.size(); ++k) {
                const int j1 = e.point_i1(k), j2 = e.point_i2(k);
                std::vector<int> p;
                for (const auto& o : lay.subdomains)
                    if (o.index != d.index && o.contains(j1, j2)) p.push_back(o.index);
                require(!p.empty(), "interface point without partner subdomain");
                e.partners.push_back(std::move(p));
            }
            list.push_back(std::move(e));
        };
        if (d.i1.lo > 0) add(Side::left, 0, -1.0, d.i1.lo, d.i2);
        if (d.i1.hi < grid.x1.n - 1) add(Side::right, 0, 1.0, d.i1.hi, d.i2);
        if (d.i2.lo > 0) add(Side::bottom, 1, -1.0, d.i2.lo, d.i1);
        if (d.i2.hi < grid.x2.n - 1) add(Side::top, 1, 1.0, d.i2.hi, d.i1);
    }
    return lay;
}

}  // namespace swr
