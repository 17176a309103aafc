#pragma once

#include "swr/complexity.hpp"
#include "swr/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <thread>

namespace swr {

// Worker count: explicit request, else the SWR_WORKERS environment variable,
// else the config value, else the number of logical cores.
inline int resolve_workers(int config_value, std::optional<int> cli = std::nullopt) {
    if (cli && *cli > 0) return *cli;
    if (const char* e = std::getenv("SWR_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(e, &end, 10);
        if (end != e && *end == '\0' && v > 0) return static_cast<int>(v);
        throw Error(std::string("SWR_WORKERS must be a positive integer, got '") + e + "'");
    }
    if (config_value > 0) return config_value;
    return std::max(1u, std::thread::hardware_concurrency());
}

// Everything that is fixed before the Schwarz iteration starts.
struct Scenario {
    RunConfig cfg;
    SubdomainLayout layout;
    std::vector<double> potential;
    std::vector<OrbitalSet> orbitals;  // per block, determinant bases only
    std::vector<LocalBasis> bases;
    std::vector<LocalOperators> ops;
    GlobalField<double> phi0;
    std::vector<VecR> initial;
    double max_projection_residual = 0;
    double initial_reconstruction_error = 0;
    double shift = 0;
    std::vector<std::string> diagnostics;
    std::vector<std::pair<std::string, double>> phase_seconds;

    int K_tot() const {
        int k = 0;
        for (const auto& b : bases) k += b.size();
        return k;
    }
};

namespace detail {

class PhaseTimer {
public:
    explicit PhaseTimer(std::vector<std::pair<std::string, double>>& sink) : sink_(sink) {}
    void mark(const std::string& name) {
        const auto now = std::chrono::steady_clock::now();
        sink_.push_back({name, std::chrono::duration<double>(now - t_).count()});
        t_ = now;
    }

private:
    std::vector<std::pair<std::string, double>>& sink_;
    std::chrono::steady_clock::time_point t_ = std::chrono::steady_clock::now();
};

inline OrbitalSpec orbital_spec(const RunConfig& c, double x_b) {
    OrbitalSpec s;
    s.nuclei = c.potential.nuclei;
    s.mollifier = c.potential.mollifier;
    s.scale_4pi = c.potential.scale_4pi;
    s.smoothing = c.smoothing;
    s.barrier = c.barrier;
    s.barrier.x_b = x_b;
    s.mollify = c.mollify_orbitals;
    return s;
}

}  // namespace detail

inline std::vector<LocalBasis> build_bases(const RunConfig& c, const SubdomainLayout& lay, std::vector<OrbitalSet>& orbitals,
                                           std::vector<std::string>& diagnostics, WorkerPool& pool) {
    const int P = lay.count();
    std::vector<LocalBasis> bases(P);
    if (c.basis == BasisKind::gaussian) {
        pool.parallel_for(P, [&](int i) { bases[i] = gaussian_basis(lay, i + 1, c.n_phi, c.delta); });
        return bases;
    }
    if (c.basis == BasisKind::gaussian_determinant) {
        std::vector<std::vector<double>> centres(lay.L);
        for (int r = 1; r <= lay.L; ++r) {
            const auto& d = lay.sub(lay.index_of(r, 1));
            centres[r - 1] = uniform_centres(d.pad1_lo, d.pad1_hi, c.n_phi);
        }
        pool.parallel_for(P, [&](int i) {
            const auto& d = lay.sub(i + 1);
            bases[i] = gaussian_determinant_basis(lay.grid, i + 1, centres[d.r - 1], centres[d.s - 1], c.delta);
        });
        return bases;
    }

    // Local Slater determinants from barrier-confined orbitals of each block.
    const int per_block = c.orbitals_per_block > 0 ? c.orbitals_per_block : c.n_phi + 1;
    const int K = c.determinants > 0 ? c.determinants : slater_count(c.n_phi);
    orbitals.assign(lay.L, {});
    pool.parallel_for(lay.L, [&](int r0) {
        const auto& d = lay.sub(lay.index_of(r0 + 1, 1));
        const double centre = 0.5 * (d.block1_lo + d.block1_hi);
        const double x_b = c.x_b ? *c.x_b : 0.5 * (d.pad1_hi - d.pad1_lo);
        orbitals[r0] = local_orbitals(lay.grid.x1, centre, detail::orbital_spec(c, x_b), per_block, r0 + 1);
    });
    for (const auto& o : orbitals)
        for (const auto& m : o.diagnostics) diagnostics.push_back("block " + std::to_string(o.block) + ": " + m);
    pool.parallel_for(P, [&](int i) {
        const auto& d = lay.sub(i + 1);
        LocalBasis b = d.r == d.s ? slater_basis(lay.grid, i + 1, orbitals[d.r - 1], nullptr, K)
                                  : slater_basis(lay.grid, i + 1, orbitals[d.r - 1], &orbitals[d.s - 1], K);
        if (c.basis == BasisKind::augmented) b = augment_basis(b, lay, c.augment);
        bases[i] = std::move(b);
    });
    return bases;
}

inline Scenario build_scenario(const RunConfig& cfg, WorkerPool& pool) {
    cfg.validate();
    Scenario sc;
    sc.cfg = cfg;
    detail::PhaseTimer timer(sc.phase_seconds);

    const GlobalGrid grid(cfg.a, cfg.b, cfg.c, cfg.d, cfg.n1, cfg.n2);
    sc.layout = build_layout(grid, cfg.L, cfg.overlap);
    sc.potential = cfg.potential.tabulate(grid);
    if (cfg.potential.nuclear == NuclearModel::mollified && 2.0 * cfg.potential.mollifier.eps / grid.x1.h() < 4.0)
        sc.diagnostics.push_back("potential: mollifier support spans fewer than 4 grid cells");
    timer.mark("potential");

    sc.bases = build_bases(cfg, sc.layout, sc.orbitals, sc.diagnostics, pool);
    timer.mark("basis");

    const int P = sc.layout.count();
    const bool dipoles = cfg.mode == RunMode::tdse && cfg.field;
    sc.ops.resize(P);
    pool.parallel_for(P, [&](int i) { sc.ops[i] = assemble_local(sc.layout, i + 1, sc.bases, sc.potential, dipoles); });
    timer.mark("operators");

    const InitialSpec init = cfg.initial;
    sc.phi0 = tabulate_field<double>(grid, [&](double x1, double x2) { return init(x1, x2); });
    if (init.normalize) {
        const double n = field_norm(sc.phi0);
        require(n > 0, "initial data has zero norm");
        for (auto& v : sc.phi0.values) v /= n;
    }
    sc.initial.resize(P);
    std::vector<double> resid(P, 0.0);
    pool.parallel_for(P, [&](int i) {
        const auto& d = sc.layout.sub(i + 1);
        auto pr = project_initial(sc.bases[i], sc.ops[i].A, field_slice(sc.phi0, d.i1, d.i2), d.i1, d.i2);
        sc.initial[i] = std::move(pr.coefficients);
        resid[i] = pr.relative_residual;
    });
    sc.max_projection_residual = *std::max_element(resid.begin(), resid.end());
    sc.initial_reconstruction_error = field_l2_diff(reconstruct_global<double>(sc.layout, sc.bases, sc.initial), sc.phi0);
    timer.mark("projection");

    if (cfg.mode == RunMode::ngf)
        sc.shift = cfg.shift ? *cfg.shift : *std::min_element(sc.potential.begin(), sc.potential.end());
    return sc;
}

inline SwrOptions swr_options(const Scenario& sc, int workers) {
    const auto& c = sc.cfg;
    SwrOptions o;
    o.mode = c.mode;
    o.tc = c.tc;
    o.steps = c.steps();
    o.dt = c.T / o.steps;  // exact horizon
    o.ngf = c.ngf;
    o.ngf.dt = c.dt;
    o.ngf.shift = sc.shift;
    o.tdse.dt = c.T / o.steps;
    o.tdse.T = c.T;
    o.tdse.laser = c.laser;
    o.tdse.field = c.field;
    o.delta_sc = c.delta_sc;
    o.max_iterations = c.max_iterations;
    o.residual = c.residual;
    o.workers = workers;
    o.snapshot_stride = c.dump_stride;
    return o;
}

template <class S> SwrProblem<S> make_problem(const Scenario& sc) {
    SwrProblem<S> p;
    p.layout = &sc.layout;
    p.bases = sc.bases;
    p.ops = sc.ops;
    for (const auto& v : sc.initial) p.initial.push_back(v.template cast<S>());
    p.potential = sc.potential;
    return p;
}

struct RunReport {
    nlohmann::json summary;
    bool converged = false;
    std::vector<IterationRecord> history;
    Counters counters;
    std::optional<SwrResult<double>> real;
    std::optional<SwrResult<cplx>> complex;
};

// k at which the residual first drops to the threshold, or -1.
inline int iterations_to(const std::vector<IterationRecord>& h, double threshold) {
    for (const auto& r : h)
        if (r.residual <= threshold) return r.k;
    return -1;
}

namespace detail {

inline std::string fmt17(double v) {
    if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream os(p);
    require(static_cast<bool>(os), "cannot write " + p.string());
    return os;
}

template <class S> void fill_counters(Counters& c, const SwrResult<S>& r, const std::vector<std::pair<std::string, double>>& build) {
    c.per_subdomain = r.solve_counts;
    c.solves = 0;
    for (long long s : r.solve_counts) c.solves += s;
    for (const auto& h : r.history) c.n_pk.emplace_back(h.steps.begin(), h.steps.end());
    c.phase_seconds = build;
    c.phase_seconds.push_back({"schwarz", r.sweep_seconds});
    c.worker_busy = r.worker_busy;
}

inline void write_history(const std::filesystem::path& dir, const std::vector<IterationRecord>& h) {
    auto os = open_out(dir / "residual_history.csv");
    os << "k,residual,log10_residual\n";
    for (const auto& r : h) os << r.k << ',' << fmt17(r.residual) << ',' << fmt17(std::log10(r.residual)) << '\n';
    auto ts = open_out(dir / "timing.csv");
    ts << "k,wallclock_s,steps_total\n";
    for (const auto& r : h) {
        long long s = 0;
        for (int n : r.steps) s += n;
        ts << r.k << ',' << fmt17(r.wallclock_s) << ',' << s << '\n';
    }
    auto ss = open_out(dir / "subdomain_steps.csv");
    ss << "k,subdomain,steps\n";
    for (const auto& r : h)
        for (std::size_t p = 0; p < r.steps.size(); ++p) ss << r.k << ',' << p + 1 << ',' << r.steps[p] << '\n';
}

template <class S> void write_field(const std::filesystem::path& dir, const std::string& stem, const GlobalField<S>& f, bool csv) {
    write_grid_binary((dir / (stem + ".bin")).string(), f);
    if (csv) write_grid_csv((dir / (stem + ".csv")).string(), f);
}

}  // namespace detail

// Runs the Schwarz iteration on a built scenario.  With an output directory
// the CSV, grid and JSON artifacts are written there.
inline RunReport run_scenario(const Scenario& sc, int workers, const std::string& out_dir = "") {
    namespace fs = std::filesystem;
    const auto& c = sc.cfg;
    RunReport rep;
    const SwrOptions opt = swr_options(sc, workers);
    nlohmann::json& j = rep.summary;

    auto common = [&](const auto& res) {
        rep.history = res.history;
        rep.converged = res.converged;
        detail::fill_counters(rep.counters, res, sc.phase_seconds);
    };
    if (c.project_only) {
        rep.converged = true;
        rep.counters.per_subdomain.assign(sc.layout.count(), 0);
        rep.counters.phase_seconds = sc.phase_seconds;
    } else if (c.mode == RunMode::tdse) {
        SchwarzSolver<cplx> solver(make_problem<cplx>(sc), opt);
        rep.complex = solver.run();
        common(*rep.complex);
    } else {
        SchwarzSolver<double> solver(make_problem<double>(sc), opt);
        rep.real = solver.run();
        common(*rep.real);
    }

    j["scenario"] = c.name;
    j["mode"] = c.project_only ? "project" : mode_name(c.mode);
    j["source"] = c.source;
    j["workers"] = workers;
    j["layout"] = {{"L", c.L},
                   {"subdomains", sc.layout.count()},
                   {"grid", {c.n1, c.n2}},
                   {"overlap_width", {sc.layout.eps1, sc.layout.eps2}}};
    std::vector<int> ks;
    double cond_max = 0;
    for (std::size_t i = 0; i < sc.bases.size(); ++i) {
        ks.push_back(sc.bases[i].size());
        cond_max = std::max(cond_max, sc.ops[i].condition_A);
    }
    j["basis"] = {{"kind", basis_kind_name(c.basis)}, {"sizes", ks}, {"K_tot", sc.K_tot()}};
    j["condition_A_max"] = cond_max;
    j["projection"] = {{"max_relative_residual", sc.max_projection_residual},
                       {"initial_l2_error", sc.initial_reconstruction_error}};
    j["transmission"] = {{"kind", c.tc.kind == TransmissionKind::robin ? "robin" : "dirichlet"},
                         {"mu", {c.tc.mu.real(), c.tc.mu.imag()}}};
    j["dt"] = c.mode == RunMode::ngf ? c.dt : opt.dt;
    if (c.mode != RunMode::ngf) j["steps"] = opt.steps;
    if (c.mode == RunMode::ngf) j["energy_shift"] = sc.shift;
    j["converged"] = rep.converged;
    j["capped"] = !rep.converged;
    j["k_cvg"] = rep.converged && !rep.history.empty() ? nlohmann::json(rep.history.back().k) : nlohmann::json(nullptr);
    j["iterations"] = rep.history.size();
    j["final_residual"] = rep.history.empty() ? 0.0 : rep.history.back().residual;
    j["delta_sc"] = c.delta_sc;
    nlohmann::json hist = nlohmann::json::array();
    for (const auto& h : rep.history) hist.push_back({h.k, h.residual});
    j["residual_history"] = hist;
    j["diagnostics"] = sc.diagnostics;

    if (c.project_only) {
        j["final_norm"] = field_norm(reconstruct_global<double>(sc.layout, sc.bases, sc.initial));
    } else if (rep.real) {
        const auto& r = *rep.real;
        j["final_norm"] = field_norm(r.field);
        if (c.mode == RunMode::ngf) {
            j["energy"] = r.final_energy;
            GlobalField<double> af = antisymmetrize_field(r.field);
            const double an = field_norm(af);
            if (an > 1e-300) {
                for (auto& v : af.values) v /= an;
                j["energy_antisymmetrized"] = energy<double>(af, sc.potential);
            }
        } else {
            j["energy"] = r.final_energy;
        }
    } else {
        const auto& r = *rep.complex;
        j["final_norm"] = field_norm(r.field);
        if (!r.final_norms.empty()) {
            double drift = 0;
            for (double n : r.final_norms) drift = std::max(drift, std::abs(n - r.final_norms.front()));
            j["norm_drift"] = drift;
        }
    }

    // cost model with a measured exponent
    const BetaFit fit = calibrate_beta(*std::max_element(ks.begin(), ks.end()));
    ComplexityModel m;
    m.K_tot = sc.K_tot();
    m.L = c.L;
    m.beta = std::clamp(fit.beta, 1.01, 2.99);
    for (int k : ks) m.K_p.push_back(k);
    m.n_pk = rep.counters.n_pk;
    m.k_cvg = static_cast<int>(rep.history.size());
    m.n_T = opt.steps;
    const CostEstimate est = c.mode == RunMode::ngf ? cc_stationary(m) : cc_tdse(m);
    j["complexity"] = {{"beta_fit", fit.beta},
                       {"beta_used", m.beta},
                       {"beta_samples", {{"sizes", fit.sizes}, {"seconds", fit.seconds}}},
                       {"model", c.mode == RunMode::ngf ? "stationary" : "time-dependent"},
                       {"cost", est.value},
                       {"cost_uniform", est.uniform_value},
                       {"attractiveness", est.attractiveness}};
    j["counters"] = rep.counters.to_json();

    if (!out_dir.empty()) {
        const fs::path dir(out_dir);
        fs::create_directories(dir);
        detail::write_history(dir, rep.history);
        {
            auto os = detail::open_out(dir / "layout.json");
            os << sc.layout.manifest().dump(2) << '\n';
        }
        detail::write_field(dir, "initial", reconstruct_global<double>(sc.layout, sc.bases, sc.initial), c.dump_csv);
        if (c.project_only) {
            // the initial reconstruction is the only field
        } else if (rep.real) {
            const auto& r = *rep.real;
            detail::write_field(dir, "final", r.field, c.dump_csv);
            for (const auto& [k, f] : r.snapshots) detail::write_field(dir, "sweep_" + std::to_string(k), f, c.dump_csv);
            if (c.mode == RunMode::ngf) {
                auto os = detail::open_out(dir / "energy_norm.csv");
                os << "k,n,t,energy,norm,change\n";
                for (const auto& e : r.energy)
                    os << e.k << ',' << e.n << ',' << detail::fmt17(e.t) << ',' << detail::fmt17(e.energy) << ','
                       << detail::fmt17(e.norm) << ',' << detail::fmt17(e.change) << '\n';
            }
        } else {
            const auto& r = *rep.complex;
            detail::write_field(dir, "final", r.field, c.dump_csv);
            for (const auto& [k, f] : r.snapshots) detail::write_field(dir, "sweep_" + std::to_string(k), f, c.dump_csv);
            auto os = detail::open_out(dir / "norm_history.csv");
            os << "n,t,norm\n";
            for (std::size_t n = 0; n < r.final_norms.size(); ++n)
                os << n << ',' << detail::fmt17(n * opt.tdse.dt) << ',' << detail::fmt17(r.final_norms[n]) << '\n';
        }
        auto os = detail::open_out(dir / "run_summary.json");
        os << j.dump(2) << '\n';
    }
    return rep;
}

inline RunReport run_config(const RunConfig& cfg, std::optional<int> workers = std::nullopt, const std::string& out_dir = "") {
    const int w = resolve_workers(cfg.workers, workers);
    RunReport rep;
    Scenario sc;
    {
        WorkerPool pool(w);
        sc = build_scenario(cfg, pool);
    }
    return run_scenario(sc, w, out_dir);
}

struct SweepRow {
    std::string value;
    int k_to_threshold = -1;
    double final_residual = 0;
    bool converged = false;
    int iterations = 0;
};

inline std::string sweep_key(const std::string& axis) {
    if (axis == "dt") return "time.dt";
    if (axis == "mu") return "transmission.mu";
    if (axis == "overlap") return "domain.overlap_fraction";
    if (axis == "L") return "domain.L";
    throw Error("sweep axis must be one of dt, mu, overlap, L (got '" + axis + "')");
}

inline std::vector<SweepRow> run_sweep(const std::string& preset, const std::string& axis, const std::vector<std::string>& values,
                                       std::optional<double> threshold, std::optional<int> workers, const std::string& out_dir,
                                       const std::vector<std::string>& overrides = {}) {
    namespace fs = std::filesystem;
    require(!values.empty(), "sweep needs at least one value");
    const std::string key = sweep_key(axis);
    std::vector<SweepRow> rows;
    for (const auto& v : values) {
        auto ov = overrides;
        ov.push_back(key + "=" + v);
        const RunConfig cfg = load_config(preset, ov);
        const std::string sub = out_dir.empty() ? "" : (fs::path(out_dir) / (axis + "_" + v)).string();
        const RunReport rep = run_config(cfg, workers, sub);
        SweepRow r;
        r.value = v;
        r.k_to_threshold = iterations_to(rep.history, threshold ? *threshold : cfg.delta_sc);
        r.final_residual = rep.history.empty() ? 0.0 : rep.history.back().residual;
        r.converged = rep.converged;
        r.iterations = static_cast<int>(rep.history.size());
        rows.push_back(r);
    }
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        auto os = detail::open_out(fs::path(out_dir) / "sweep.csv");
        os << axis << ",k_to_threshold,final_residual,converged,iterations\n";
        for (const auto& r : rows)
            os << r.value << ',' << r.k_to_threshold << ',' << detail::fmt17(r.final_residual) << ',' << (r.converged ? 1 : 0)
               << ',' << r.iterations << '\n';
    }
    return rows;
}

}  // namespace swr
