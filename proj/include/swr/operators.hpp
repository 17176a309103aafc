#pragma once

#include "swr/basis.hpp"

namespace swr {

// Neighbour basis evaluated on part of an interface edge of the owning subdomain.
struct PartnerTrace {
    int subdomain = 0;
    std::vector<int> points;  // positions along the owner's edge
    MatR value;               // |points| x K_j
    MatR normal_derivative;   // owner's outward normal
};

struct EdgeOperator {
    int edge = 0;                  // position in layout.edges_of(i)
    std::vector<double> weights;   // trapezoid weights along the edge
    MatR value;                    // n_pts x K_i
    MatR normal_derivative;        // n_pts x K_i, outward
    MatR rhs_map;                  // K_i x n_pts, 1/2 v_l(x_k) w_k
    std::vector<PartnerTrace> partners;
    std::vector<int> partner_count;  // per point, Card of the neighbour set
    int points() const { return static_cast<int>(weights.size()); }
};

struct LocalOperators {
    MatR A;        // overlap
    MatR H;        // 1/2 grad.grad + V
    MatR Qx, Qy;   // <x1 v_l, v_p>, <x2 v_l, v_p>
    MatR M_gamma;  // sum over interface edges of the boundary mass
    std::vector<EdgeOperator> edges;
    double condition_A = 0.0;
};

namespace detail {
inline void edge_tables(const LocalBasis& b, const InterfaceEdge& e, const std::vector<int>& pts, MatR& val, MatR& dn) {
    const int m = static_cast<int>(pts.size());
    val = MatR::Zero(m, b.size());
    dn = MatR::Zero(m, b.size());
    for (int q = 0; q < m; ++q) {
        const int j1 = e.point_i1(pts[q]), j2 = e.point_i2(pts[q]);
        for (int l = 0; l < b.size(); ++l) {
            double v = 0.0, d = 0.0;
            for (const auto& t : b.functions[l].terms) {
                const Factor& a = b.f1[t.f1];
                const Factor& c = b.f2[t.f2];
                v += t.coef * a.value[j1] * c.value[j2];
                d += t.coef * (e.normal_axis == 0 ? a.deriv[j1] * c.value[j2] : a.value[j1] * c.deriv[j2]);
            }
            val(q, l) = v;
            dn(q, l) = e.normal_sign * d;
        }
    }
}

// sum_ij w_i w_j V_ij f_a(i) f_a'(i) g_b(j) g_b'(j) for all factor pairs
inline MatR potential_contraction(const LocalBasis& b, const std::vector<double>& vglobal, const GlobalGrid& grid,
                                  IndexRange r1, IndexRange r2) {
    const int n1 = r1.size(), n2 = r2.size();
    const int nf1 = static_cast<int>(b.f1.size()), nf2 = static_cast<int>(b.f2.size());
    const auto w1 = trapezoid_weights(n1, grid.x1.h());
    const auto w2 = trapezoid_weights(n2, grid.x2.h());
    MatR g1(n1, nf1 * nf1), g2(n2, nf2 * nf2), v(n1, n2);
    for (int i = 0; i < n1; ++i)
        for (int a = 0; a < nf1; ++a)
            for (int c = 0; c < nf1; ++c)
                g1(i, a * nf1 + c) = w1[i] * b.f1[a].value[r1.lo + i] * b.f1[c].value[r1.lo + i];
    for (int j = 0; j < n2; ++j)
        for (int a = 0; a < nf2; ++a)
            for (int c = 0; c < nf2; ++c)
                g2(j, a * nf2 + c) = w2[j] * b.f2[a].value[r2.lo + j] * b.f2[c].value[r2.lo + j];
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j) v(i, j) = vglobal[grid.at(r1.lo + i, r2.lo + j)];
    return g1.transpose() * v * g2;
}
}  // namespace detail

inline MatR assemble_overlap(const LocalBasis& b, const Subdomain& d) {
    MatR a = gram_matrix(b, d.i1, d.i2);
    Eigen::LLT<MatR> llt(a);
    if (llt.info() != Eigen::Success)
        throw Error("overlap matrix of subdomain " + std::to_string(d.index) + " is not positive definite");
    return a;
}

struct DipoleMatrices {
    MatR Qx, Qy;
};

inline DipoleMatrices assemble_dipole(const LocalBasis& b, const Subdomain& d) {
    const auto i1 = factor_integrals(b.ax1, b.f1, b.f1, d.i1);
    const auto i2 = factor_integrals(b.ax2, b.f2, b.f2, d.i2);
    const int k = b.size();
    DipoleMatrices q{MatR::Zero(k, k), MatR::Zero(k, k)};
    for (int l = 0; l < k; ++l)
        for (int m = l; m < k; ++m) {
            double sx = 0, sy = 0;
            for (const auto& t : b.functions[l].terms)
                for (const auto& u : b.functions[m].terms) {
                    const double c = t.coef * u.coef;
                    sx += c * i1.X(t.f1, u.f1) * i2.S(t.f2, u.f2);
                    sy += c * i1.S(t.f1, u.f1) * i2.X(t.f2, u.f2);
                }
            q.Qx(l, m) = q.Qx(m, l) = sx;
            q.Qy(l, m) = q.Qy(m, l) = sy;
        }
    return q;
}

// Kinetic + potential part.  `potential` is the global tabulation (may be empty for V = 0).
inline MatR assemble_hamiltonian_core(const LocalBasis& b, const Subdomain& d, const GlobalGrid& grid,
                                      const std::vector<double>& potential) {
    const auto i1 = factor_integrals(b.ax1, b.f1, b.f1, d.i1);
    const auto i2 = factor_integrals(b.ax2, b.f2, b.f2, d.i2);
    const int k = b.size();
    MatR h = MatR::Zero(k, k);
    MatR pv;
    const bool has_v = !potential.empty();
    if (has_v) pv = detail::potential_contraction(b, potential, grid, d.i1, d.i2);
    const int nf1 = static_cast<int>(b.f1.size()), nf2 = static_cast<int>(b.f2.size());
    (void)nf2;
    for (int l = 0; l < k; ++l)
        for (int m = l; m < k; ++m) {
            double s = 0.0;
            for (const auto& t : b.functions[l].terms)
                for (const auto& u : b.functions[m].terms) {
                    const double c = t.coef * u.coef;
                    s += c * 0.5 * (i1.K(t.f1, u.f1) * i2.S(t.f2, u.f2) + i1.S(t.f1, u.f1) * i2.K(t.f2, u.f2));
                    if (has_v) s += c * pv(t.f1 * nf1 + u.f1, t.f2 * static_cast<int>(b.f2.size()) + u.f2);
                }
            h(l, m) = h(m, l) = s;
        }
    return h;
}

// Interface tables for subdomain i: own traces, boundary mass pieces, and
// every partner's basis sampled on the shared part of each edge.
inline std::vector<EdgeOperator> assemble_interfaces(const SubdomainLayout& lay, int i,
                                                     const std::vector<LocalBasis>& bases) {
    std::vector<EdgeOperator> out;
    const auto& edges = lay.edges_of(i);
    const LocalBasis& own = bases[i - 1];
    for (int ei = 0; ei < static_cast<int>(edges.size()); ++ei) {
        const auto& e = edges[ei];
        EdgeOperator op;
        op.edge = ei;
        const double h = e.normal_axis == 0 ? lay.grid.x2.h() : lay.grid.x1.h();
        op.weights = trapezoid_weights(e.along.size(), h);
        std::vector<int> all(e.along.size());
        std::iota(all.begin(), all.end(), 0);
        detail::edge_tables(own, e, all, op.value, op.normal_derivative);
        op.rhs_map = MatR(own.size(), all.size());
        for (int q = 0; q < static_cast<int>(all.size()); ++q) op.rhs_map.col(q) = 0.5 * op.weights[q] * op.value.row(q).transpose();
        std::map<int, std::vector<int>> by_partner;
        for (int q = 0; q < e.along.size(); ++q) {
            op.partner_count.push_back(static_cast<int>(e.partners[q].size()));
            for (int j : e.partners[q]) by_partner[j].push_back(q);
        }
        for (auto& [j, pts] : by_partner) {
            PartnerTrace pt;
            pt.subdomain = j;
            pt.points = pts;
            detail::edge_tables(bases[j - 1], e, pts, pt.value, pt.normal_derivative);
            op.partners.push_back(std::move(pt));
        }
        out.push_back(std::move(op));
    }
    return out;
}

inline LocalOperators assemble_local(const SubdomainLayout& lay, int i, const std::vector<LocalBasis>& bases,
                                     const std::vector<double>& potential, bool dipoles) {
    const auto& d = lay.sub(i);
    const LocalBasis& b = bases[i - 1];
    LocalOperators ops;
    ops.A = assemble_overlap(b, d);
    ops.H = assemble_hamiltonian_core(b, d, lay.grid, potential);
    if (dipoles) {
        auto q = assemble_dipole(b, d);
        ops.Qx = std::move(q.Qx);
        ops.Qy = std::move(q.Qy);
    }
    ops.edges = assemble_interfaces(lay, i, bases);
    ops.M_gamma = MatR::Zero(b.size(), b.size());
    for (const auto& e : ops.edges) ops.M_gamma += 2.0 * e.rhs_map * e.value;
    ops.condition_A = spd_condition_number(ops.A);
    return ops;
}

// T(t) = E_x Qx + E_y Qy; linear-scalar polarization gives E (Qx + Qy).
inline MatR assemble_field_matrix(const MatR& qx, const MatR& qy, const LaserField& f, double t) {
    const auto [ex, ey] = f(t);
    return ex * qx + ey * qy;
}

}  // namespace swr
