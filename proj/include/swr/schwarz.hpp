#pragma once

#include "swr/timestep.hpp"
#include "swr/workers.hpp"

#include <chrono>
#include <optional>

namespace swr {

enum class RunMode { heat, ngf, tdse };
enum class TransmissionKind { robin, dirichlet };
enum class ResidualMode { successive, mismatch };

struct TransmissionSpec {
    TransmissionKind kind = TransmissionKind::robin;
    cplx mu{1.0, 0.0};
    double penalty = 1e6;

    // Coefficient of the trace term: mu for Robin, the penalty for Dirichlet.
    cplx coefficient() const { return kind == TransmissionKind::robin ? mu : cplx(penalty, 0.0); }

    void validate(const SubdomainLayout& lay) const {
        if (kind == TransmissionKind::robin) require(mu != cplx(0.0, 0.0), "Robin transmission needs mu != 0");
        if (kind == TransmissionKind::dirichlet && lay.L > 1)
            require(lay.half_cells1 > 0 && lay.half_cells2 > 0,
                    "Dirichlet transmission requires overlapping subdomains");
    }
};

// g = d_n psi_j + mu psi_j on the interface samples.
template <class S> Vec<S> robin_data(const Vec<S>& value, const Vec<S>& normal_derivative, S mu) {
    require(value.size() == normal_derivative.size(), "robin_data: missing normal-derivative samples");
    return normal_derivative + mu * value;
}

template <class S> Vec<S> corner_average(const std::vector<Vec<S>>& data) {
    require(!data.empty(), "corner_average: empty neighbour list");
    Vec<S> s = data.front();
    for (std::size_t k = 1; k < data.size(); ++k) s += data[k];
    return s / static_cast<double>(data.size());
}

struct SwrOptions {
    RunMode mode = RunMode::heat;
    TransmissionSpec tc;
    double dt = 0.1;
    int steps = 10;  // heat and TDSE horizons
    NgfConfig ngf;
    TdseConfig tdse;
    double delta_sc = 1e-14;
    int max_iterations = 200;
    ResidualMode residual = ResidualMode::successive;
    int workers = 1;
    int snapshot_stride = 0;  // keep reconstructed final-time fields every this many sweeps
    std::function<void(int, double)> on_iteration;
};

template <class S> struct SwrProblem {
    const SubdomainLayout* layout = nullptr;
    std::vector<LocalBasis> bases;
    std::vector<LocalOperators> ops;
    std::vector<Vec<S>> initial;
    std::vector<double> potential;  // global tabulation, used for the energy
};

struct EnergyRecord {
    int k = 0, n = 0;
    double t = 0, energy = 0, norm = 0, change = 0;
};

struct IterationRecord {
    int k = 0;
    double residual = 0;
    double wallclock_s = 0;
    std::vector<int> steps;  // n_p^{(k)} per subdomain
};

template <class S> struct SwrResult {
    std::vector<IterationRecord> history;
    bool converged = false;
    int k_cvg = 0;
    std::vector<Vec<S>> coefficients;  // final level of the last sweep
    GlobalField<S> field;
    std::vector<EnergyRecord> energy;   // imaginary time, every step of every sweep
    std::vector<double> final_norms;    // reconstructed norm per level of the last sweep
    std::vector<long long> solve_counts;  // linear solves per subdomain, counted at the solver
    std::vector<std::pair<int, GlobalField<S>>> snapshots;
    double sweep_seconds = 0;
    double final_energy = 0;
    std::vector<double> worker_busy;  // seconds inside subdomain tasks per worker
};

template <class S> class SchwarzSolver {
public:
    SchwarzSolver(SwrProblem<S> problem, SwrOptions opt)
        : pb_(std::move(problem)), opt_(std::move(opt)), pool_(opt_.workers) {
        require(pb_.layout != nullptr, "Schwarz solver needs a layout");
        const auto& lay = *pb_.layout;
        const int P = lay.count();
        require(static_cast<int>(pb_.bases.size()) == P && static_cast<int>(pb_.ops.size()) == P &&
                    static_cast<int>(pb_.initial.size()) == P,
                "Schwarz solver needs one basis, operator set and initial state per subdomain");
        opt_.tc.validate(lay);
        if constexpr (!is_complex_v<S>) {
            require(opt_.mode != RunMode::tdse, "real-time propagation needs complex arithmetic");
            require(opt_.tc.coefficient().imag() == 0.0, "imaginary-time transmission needs a real mu");
        } else {
            require(opt_.mode == RunMode::tdse, "complex arithmetic is only used for real-time propagation");
        }
        if (opt_.mode == RunMode::ngf) opt_.ngf.validate();
        if (opt_.mode == RunMode::tdse) opt_.tdse.validate();
        const S mu = scalar(opt_.tc.coefficient());

        coupling_.resize(P);
        htilde_.resize(P);
        for (int i = 1; i <= P; ++i) {
            const auto& ops = pb_.ops[i - 1];
            htilde_[i - 1] = ops.H.template cast<S>() + (0.5 * mu) * ops.M_gamma.template cast<S>();
            std::map<int, Mat<S>> acc;
            for (const auto& e : ops.edges) {
                for (const auto& pt : e.partners) {
                    const int kj = pb_.bases[pt.subdomain - 1].size();
                    Mat<S> r(pt.points.size(), kj);
                    for (int q = 0; q < static_cast<int>(pt.points.size()); ++q) {
                        const double w = 1.0 / e.partner_count[pt.points[q]];
                        r.row(q) = w * (pt.normal_derivative.row(q).template cast<S>() +
                                        mu * pt.value.row(q).template cast<S>());
                    }
                    Mat<S> sel(e.rhs_map.rows(), pt.points.size());
                    for (int q = 0; q < static_cast<int>(pt.points.size()); ++q)
                        sel.col(q) = e.rhs_map.col(pt.points[q]).template cast<S>();
                    auto it = acc.find(pt.subdomain);
                    if (it == acc.end())
                        acc.emplace(pt.subdomain, sel * r);
                    else
                        it->second += sel * r;
                }
            }
            for (auto& [j, m] : acc) coupling_[i - 1].push_back({j, std::move(m)});
        }
    }

    const SwrProblem<S>& problem() const { return pb_; }

    // Averaged transmission data seen by subdomain i on edge e from the given
    // neighbour coefficients (one vector per subdomain).
    Vec<S> transmission_data(int i, int e, const std::vector<Vec<S>>& c) const {
        const auto& op = pb_.ops[i - 1].edges[e];
        const S mu = scalar(opt_.tc.coefficient());
        Vec<S> g = Vec<S>::Zero(op.points());
        for (const auto& pt : op.partners) {
            const Vec<S> v = pt.value.template cast<S>() * c[pt.subdomain - 1];
            const Vec<S> d = pt.normal_derivative.template cast<S>() * c[pt.subdomain - 1];
            const Vec<S> rd = robin_data<S>(v, d, mu);
            for (int q = 0; q < static_cast<int>(pt.points.size()); ++q)
                g[pt.points[q]] += rd[q] / static_cast<double>(op.partner_count[pt.points[q]]);
        }
        return g;
    }

    SwrResult<S> run() {
        const auto& lay = *pb_.layout;
        const int P = lay.count();
        SwrResult<S> res;
        res.solve_counts.assign(P, 0);
        solve_counts_ = &res.solve_counts;

        std::vector<Vec<S>> c0 = pb_.initial;
        if (opt_.mode == RunMode::ngf && opt_.ngf.normalize) normalize_global<S>(lay, pb_.bases, c0);

        Trajectory prev;
        prev.transmit.assign(P, {});
        prev.state.assign(P, {});
        for (int i = 0; i < P; ++i) {
            prev.transmit[i].push_back(c0[i]);
            prev.state[i].push_back(c0[i]);
        }

        const auto t_start = std::chrono::steady_clock::now();
        for (int k = 1; k <= opt_.max_iterations; ++k) {
            const auto t0 = std::chrono::steady_clock::now();
            Trajectory cur = sweep(k, c0, prev, res);
            const double r = residual(cur, prev);
            IterationRecord rec;
            rec.k = k;
            rec.residual = r;
            for (int i = 0; i < P; ++i) rec.steps.push_back(static_cast<int>(cur.state[i].size()) - 1);
            rec.wallclock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            res.history.push_back(rec);
            if (opt_.on_iteration) opt_.on_iteration(k, r);
            const bool done = r <= opt_.delta_sc || k == opt_.max_iterations;
            if (opt_.snapshot_stride > 0 && (k % opt_.snapshot_stride == 0 || done))
                res.snapshots.push_back({k, reconstruct_global<S>(lay, pb_.bases, last_level(cur))});
            prev = std::move(cur);
            if (r <= opt_.delta_sc) {
                res.converged = true;
                res.k_cvg = k;
                break;
            }
        }
        if (!res.converged) res.k_cvg = static_cast<int>(res.history.size());
        res.sweep_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
        res.coefficients = last_level(prev);
        res.field = reconstruct_global<S>(lay, pb_.bases, res.coefficients);
        if (opt_.mode != RunMode::ngf) {
            for (std::size_t n = 0; n < prev.state[0].size(); ++n) {
                std::vector<Vec<S>> cn(P);
                for (int i = 0; i < P; ++i) cn[i] = prev.state[i][std::min(n, prev.state[i].size() - 1)];
                res.final_norms.push_back(field_norm(reconstruct_global<S>(lay, pb_.bases, cn)));
            }
        }
        if constexpr (!is_complex_v<S>) res.final_energy = energy<S>(res.field, pb_.potential);
        solve_counts_ = nullptr;
        res.worker_busy = pool_.busy_seconds();
        return res;
    }

private:
    struct Trajectory {
        std::vector<std::vector<Vec<S>>> transmit;  // data for the neighbours (pre-normalization in NGF)
        std::vector<std::vector<Vec<S>>> state;     // solution levels
    };

    static S scalar(cplx z) {
        if constexpr (is_complex_v<S>)
            return z;
        else
            return z.real();
    }

    static const Vec<S>& level(const std::vector<Vec<S>>& traj, std::size_t n) {
        return traj[std::min(n, traj.size() - 1)];
    }

    std::vector<Vec<S>> last_level(const Trajectory& t) const {
        std::vector<Vec<S>> out;
        for (const auto& s : t.state) out.push_back(s.back());
        return out;
    }

    Vec<S> boundary_rhs(int i, const Trajectory& prev, std::size_t n) const {
        Vec<S> b = Vec<S>::Zero(pb_.bases[i].size());
        for (const auto& [j, m] : coupling_[i]) b += m * level(prev.transmit[j - 1], n);
        return b;
    }

    Trajectory sweep(int k, const std::vector<Vec<S>>& c0, const Trajectory& prev, SwrResult<S>& res) {
        const int P = pb_.layout->count();
        Trajectory cur;
        cur.transmit.assign(P, {});
        cur.state.assign(P, {});
        if constexpr (is_complex_v<S>) {
            pool_.parallel_for(P, [&](int i) { tdse_subdomain(i, c0[i], prev, cur); });
        } else {
            if (opt_.mode == RunMode::ngf) {
                ngf_sweep(k, c0, prev, cur, res);
                return cur;
            }
            pool_.parallel_for(P, [&](int i) { heat_subdomain(i, c0[i], prev, cur); });
        }
        cur.transmit = cur.state;
        return cur;
    }

    void heat_subdomain(int i, const Vec<S>& c0, const Trajectory& prev, Trajectory& cur)
        requires(!is_complex_v<S>)
    {
        const auto& ops = pb_.ops[i];
        NgfStepper st(ops.A, htilde_[i], opt_.dt, 0.0);
        auto& out = cur.state[i];
        out.reserve(opt_.steps + 1);
        out.push_back(c0);
        for (int n = 1; n <= opt_.steps; ++n) {
            const VecR b = boundary_rhs(i, prev, n);
            out.push_back(st.step(out.back(), &b));
            ++(*solve_counts_)[i];
        }
    }

    void tdse_subdomain(int i, const Vec<S>& c0, const Trajectory& prev, Trajectory& cur)
        requires(is_complex_v<S>)
    {
        const auto& ops = pb_.ops[i];
        const double dt = opt_.tdse.dt;
        const int steps = opt_.tdse.steps();
        const bool field = opt_.tdse.field;
        const MatC a = ops.A.template cast<cplx>();
        const cplx ih(0.0, 0.5 * dt);
        auto& out = cur.state[i];
        out.reserve(steps + 1);
        out.push_back(c0);
        std::optional<Eigen::PartialPivLU<MatC>> fixed;
        if (!field) fixed.emplace(MatC(a + ih * htilde_[i]));
        VecC b0 = boundary_rhs(i, prev, 0);
        MatC m0 = htilde_[i];
        if (field) m0 += assemble_field_matrix(ops.Qx, ops.Qy, opt_.tdse.laser, 0.0).template cast<cplx>();
        for (int n = 1; n <= steps; ++n) {
            const VecC b1 = boundary_rhs(i, prev, n);
            MatC m1 = htilde_[i];
            if (field) m1 += assemble_field_matrix(ops.Qx, ops.Qy, opt_.tdse.laser, n * dt).template cast<cplx>();
            const VecC rhs = a * out.back() - ih * (m0 * out.back()) + ih * (b0 + b1);
            if (fixed) {
                out.push_back(fixed->solve(rhs));
            } else {
                Eigen::PartialPivLU<MatC> lu(MatC(a + ih * m1));
                out.push_back(lu.solve(rhs));
            }
            ++(*solve_counts_)[i];
            b0 = b1;
            m0 = std::move(m1);
        }
    }

    void ngf_sweep(int k, const std::vector<Vec<S>>& c0, const Trajectory& prev, Trajectory& cur, SwrResult<S>& res)
        requires(!is_complex_v<S>)
    {
        const auto& lay = *pb_.layout;
        const int P = lay.count();
        const auto& cfg = opt_.ngf;
        std::vector<NgfStepper> steppers;
        steppers.reserve(P);
        for (int i = 0; i < P; ++i) steppers.emplace_back(pb_.ops[i].A, htilde_[i], cfg.dt, cfg.shift);

        std::vector<VecR> c = c0, ct(P);
        for (int i = 0; i < P; ++i) {
            cur.transmit[i].push_back(c0[i]);
            cur.state[i].push_back(c0[i]);
        }
        GlobalField<double> f_prev = reconstruct_global<double>(lay, pb_.bases, c);
        {
            EnergyRecord e0;
            e0.k = k;
            e0.energy = energy<double>(f_prev, pb_.potential);
            e0.norm = field_norm(f_prev);
            res.energy.push_back(e0);
        }
        for (int n = 1;; ++n) {
            if (n > cfg.max_steps)
                throw Error("imaginary-time propagation reached the step cap (" + std::to_string(cfg.max_steps) +
                            ") without meeting the stopping tolerance in Schwarz iteration " + std::to_string(k));
            pool_.parallel_for(P, [&](int i) {
                const VecR b = boundary_rhs(i, prev, n);
                ct[i] = steppers[i].step(c[i], &b);
                ++(*solve_counts_)[i];
            });
            GlobalField<double> f = reconstruct_global<double>(lay, pb_.bases, ct);
            double nrm = 1.0;
            if (cfg.normalize) {
                nrm = field_norm(f);
                if (!(nrm > 0)) throw Error("imaginary-time iterate vanished");
                for (int i = 0; i < P; ++i) c[i] = ct[i] / nrm;
                for (auto& v : f.values) v /= nrm;
            } else {
                c = ct;
            }
            if (cfg.antisymmetrize) {
                const GlobalField<double> af = antisymmetrize_field(f);
                pool_.parallel_for(P, [&](int i) {
                    const auto& d = lay.sub(i + 1);
                    c[i] = project_initial(pb_.bases[i], pb_.ops[i].A, field_slice(af, d.i1, d.i2), d.i1, d.i2)
                               .coefficients;
                });
                if (cfg.normalize) normalize_global<double>(lay, pb_.bases, c);
                f = reconstruct_global<double>(lay, pb_.bases, c);
            }
            const double change = field_l2_diff(f, f_prev);
            EnergyRecord er;
            er.k = k;
            er.n = n;
            er.t = n * cfg.dt;
            er.energy = energy<double>(f, pb_.potential);
            er.norm = field_norm(f);
            er.change = change;
            res.energy.push_back(er);
            for (int i = 0; i < P; ++i) {
                cur.transmit[i].push_back(ct[i]);
                cur.state[i].push_back(c[i]);
            }
            f_prev = std::move(f);
            if (change <= cfg.delta) break;
        }
    }

    double residual(const Trajectory& cur, const Trajectory& prev) {
        const int P = pb_.layout->count();
        std::vector<double> part(P, 0.0);
        const double dt = opt_.mode == RunMode::ngf ? opt_.ngf.dt : (opt_.mode == RunMode::tdse ? opt_.tdse.dt : opt_.dt);
        pool_.parallel_for(P, [&](int i) {
            const auto& ops = pb_.ops[i];
            if (ops.edges.empty()) return;
            const std::size_t nlev = std::max(cur.state[i].size(), prev.state[i].size());
            double acc = 0.0;
            for (std::size_t n = 0; n < nlev; ++n) {
                const double w = (nlev == 1) ? 1.0 : ((n == 0 || n + 1 == nlev) ? 0.5 * dt : dt);
                double v = 0.0;
                if (opt_.residual == ResidualMode::successive) {
                    const Vec<S> d = level(cur.state[i], n) - level(prev.state[i], n);
                    v = std::real(d.dot(ops.M_gamma.template cast<S>() * d));
                } else {
                    v = mismatch(i, cur, n);
                }
                acc += w * v;
            }
            part[i] = acc;
        });
        return std::sqrt(std::max(0.0, deterministic_sum(part)));
    }

    // Interface mismatch between own Robin data and the averaged neighbour data at level n.
    double mismatch(int i, const Trajectory& cur, std::size_t n) const {
        const auto& ops = pb_.ops[i];
        const S mu = scalar(opt_.tc.coefficient());
        std::vector<Vec<S>> cn(cur.transmit.size());
        for (std::size_t j = 0; j < cn.size(); ++j) cn[j] = level(cur.transmit[j], n);
        double s = 0.0;
        for (int e = 0; e < static_cast<int>(ops.edges.size()); ++e) {
            const auto& op = ops.edges[e];
            const Vec<S> own = op.normal_derivative.template cast<S>() * cn[i] + mu * (op.value.template cast<S>() * cn[i]);
            const Vec<S> g = transmission_data(i + 1, e, cn);
            for (int q = 0; q < op.points(); ++q) s += op.weights[q] * abs2(own[q] - g[q]);
        }
        return s;
    }

    SwrProblem<S> pb_;
    SwrOptions opt_;
    WorkerPool pool_;
    std::vector<Mat<S>> htilde_;
    std::vector<std::vector<std::pair<int, Mat<S>>>> coupling_;
    std::vector<long long>* solve_counts_ = nullptr;
};

}  // namespace swr
