#include <swr/schwarz.hpp>

#include <gtest/gtest.h>

using namespace swr;

namespace {

struct HeatSetup {
    SubdomainLayout lay;
    SwrProblem<double> pb;
};

// Small zero-potential heat problem with Gaussian bases and Gaussian initial data.
HeatSetup heat_setup(int L, double frac, double amplitude = 1.0, double cx = 0.0, int n_phi = 4) {
    HeatSetup s;
    s.lay = build_layout(GlobalGrid(-6, 6, -6, 6, 49, 49), L, OverlapSpec{std::nullopt, std::nullopt, frac});
    s.pb.layout = &s.lay;
    for (int i = 1; i <= s.lay.count(); ++i) s.pb.bases.push_back(gaussian_basis(s.lay, i, n_phi, 0.7));
    for (int i = 1; i <= s.lay.count(); ++i) s.pb.ops.push_back(assemble_local(s.lay, i, s.pb.bases, {}, false));
    const auto phi = tabulate_field<double>(
        s.lay.grid, [&](double x, double y) { return amplitude * std::exp(-0.3 * ((x - cx) * (x - cx) + y * y)); });
    for (int i = 1; i <= s.lay.count(); ++i) {
        const auto& d = s.lay.sub(i);
        s.pb.initial.push_back(
            project_initial(s.pb.bases[i - 1], s.pb.ops[i - 1].A, field_slice(phi, d.i1, d.i2), d.i1, d.i2).coefficients);
    }
    return s;
}

SwrOptions heat_options(int workers = 1) {
    SwrOptions o;
    o.mode = RunMode::heat;
    o.tc.mu = 1.0;
    o.dt = 0.2;
    o.steps = 10;
    o.delta_sc = 1e-10;
    o.max_iterations = 40;
    o.workers = workers;
    return o;
}

}  // namespace

TEST(Transmission, RobinDataAndCornerAverage) {
    VecR v(2), d(2);
    v << 1.0, 2.0;
    d << 0.5, -1.0;
    const VecR g = robin_data<double>(v, d, 10.0);
    EXPECT_DOUBLE_EQ(g[0], 10.5);
    EXPECT_DOUBLE_EQ(g[1], 19.0);
    EXPECT_THROW(robin_data<double>(v, VecR(3), 1.0), Error);

    std::vector<VecR> four(4, VecR::Ones(1));
    four[3][0] = 5.0;
    EXPECT_DOUBLE_EQ(corner_average<double>(four)[0], 2.0);
    EXPECT_DOUBLE_EQ(corner_average<double>({v})[1], 2.0);
    EXPECT_THROW(corner_average<double>({}), Error);
}

TEST(Transmission, DirichletNeedsOverlap) {
    auto s = heat_setup(2, 0.0);
    auto o = heat_options();
    o.tc.kind = TransmissionKind::dirichlet;
    EXPECT_THROW((SchwarzSolver<double>(s.pb, o)), Error);
    o.tc.kind = TransmissionKind::robin;
    o.tc.mu = 0.0;
    EXPECT_THROW((SchwarzSolver<double>(s.pb, o)), Error);
    o.tc.mu = cplx(0.0, 1.0);
    EXPECT_THROW((SchwarzSolver<double>(s.pb, o)), Error);
}

TEST(Schwarz, SingleDomainIsOneSweepOfImplicitEuler) {
    auto s = heat_setup(1, 0.0);
    auto o = heat_options();
    SchwarzSolver<double> solver(s.pb, o);
    const auto r = solver.run();
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.k_cvg, 1);
    EXPECT_EQ(r.history.front().residual, 0.0);
    EXPECT_EQ(r.solve_counts.front(), o.steps);
    VecR c = s.pb.initial[0];
    const auto& ops = s.pb.ops[0];
    for (int n = 0; n < o.steps; ++n) c = ngf_step(ops.A, ops.H, c, nullptr, o.dt);
    EXPECT_LT((c - r.coefficients[0]).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Schwarz, HeatResidualDecaysAndCountsMatch) {
    auto s = heat_setup(3, 0.2);
    const auto r = SchwarzSolver<double>(s.pb, heat_options()).run();
    ASSERT_GE(r.history.size(), 3u);
    EXPECT_TRUE(r.converged);
    EXPECT_LT(r.history.back().residual, 1e-10);
    EXPECT_LT(r.history[2].residual, r.history[0].residual);
    long long logged = 0, solved = 0;
    for (const auto& h : r.history)
        for (int n : h.steps) logged += n;
    for (long long n : r.solve_counts) solved += n;
    EXPECT_EQ(logged, solved);
    EXPECT_EQ(solved, static_cast<long long>(r.history.size()) * 9 * 10);
}

TEST(Schwarz, MirrorSymmetricDataStaysSymmetric) {
    auto s = heat_setup(2, 0.2);
    auto o = heat_options();
    o.snapshot_stride = 1;
    o.max_iterations = 6;
    const auto r = SchwarzSolver<double>(s.pb, o).run();
    ASSERT_FALSE(r.snapshots.empty());
    const int n = s.lay.grid.x1.n;
    for (const auto& [k, f] : r.snapshots) {
        double worst = 0, scale = 0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                worst = std::max(worst, std::abs(f(i, j) - f(n - 1 - i, j)));
                scale = std::max(scale, std::abs(f(i, j)));
            }
        EXPECT_LE(worst, 1e-12 * scale) << "sweep " << k;
    }
    // mirror neighbours 1 <-> 2 carry mirrored coefficient vectors
    EXPECT_NEAR(r.coefficients[0].norm(), r.coefficients[1].norm(), 1e-12 * r.coefficients[0].norm());
}

TEST(Schwarz, ResidualIsHomogeneousInTheData) {
    auto a = heat_setup(2, 0.2, 1.0, 0.7);
    auto b = heat_setup(2, 0.2, 3.0, 0.7);
    auto o = heat_options();
    o.max_iterations = 5;
    const auto ra = SchwarzSolver<double>(a.pb, o).run();
    const auto rb = SchwarzSolver<double>(b.pb, o).run();
    ASSERT_EQ(ra.history.size(), rb.history.size());
    for (std::size_t k = 0; k < ra.history.size(); ++k)
        EXPECT_NEAR(rb.history[k].residual, 3.0 * ra.history[k].residual, 1e-9 * rb.history[k].residual);
}

TEST(Schwarz, WorkerCountDoesNotChangeBits) {
    auto s = heat_setup(3, 0.2, 1.0, 0.4);
    const auto r1 = SchwarzSolver<double>(s.pb, heat_options(1)).run();
    const auto r3 = SchwarzSolver<double>(s.pb, heat_options(3)).run();
    ASSERT_EQ(r1.history.size(), r3.history.size());
    for (std::size_t k = 0; k < r1.history.size(); ++k) EXPECT_EQ(r1.history[k].residual, r3.history[k].residual);
    EXPECT_EQ(r1.field.values, r3.field.values);
    EXPECT_EQ(r1.worker_busy.size(), 1u);
    EXPECT_EQ(r3.worker_busy.size(), 3u);
}

TEST(Schwarz, MismatchResidualSettlesAtTheDiscretizationDefect) {
    // The Robin condition holds only weakly in each trace space, so the pointwise
    // mismatch levels off at a floor that shrinks as the bases are refined.
    auto o = heat_options();
    o.residual = ResidualMode::mismatch;
    o.delta_sc = 1e-8;
    o.max_iterations = 25;
    std::vector<double> floors;
    for (int n_phi : {4, 8}) {
        auto s = heat_setup(2, 0.2, 1.0, 0.3, n_phi);
        const auto r = SchwarzSolver<double>(s.pb, o).run();
        ASSERT_EQ(r.history.size(), 25u);
        const double last = r.history.back().residual, before = r.history[r.history.size() - 2].residual;
        EXPECT_LE(std::abs(last - before), 1e-8 * last);
        floors.push_back(last);
    }
    EXPECT_LT(floors[1], 0.5 * floors[0]);
}

TEST(Schwarz, ImaginaryTimeKeepsUnitNormAndLowersEnergy) {
    auto s = heat_setup(2, 0.2, 1.0, 0.3, 6);
    // harmonic well so the ground state is localized
    s.pb.potential.resize(s.lay.grid.size());
    for (int i = 0; i < s.lay.grid.x1.n; ++i)
        for (int j = 0; j < s.lay.grid.x2.n; ++j) {
            const double x = s.lay.grid.x1.x(i), y = s.lay.grid.x2.x(j);
            s.pb.potential[s.lay.grid.at(i, j)] = 0.5 * (x * x + y * y);
        }
    s.pb.ops.clear();
    for (int i = 1; i <= s.lay.count(); ++i) s.pb.ops.push_back(assemble_local(s.lay, i, s.pb.bases, s.pb.potential, false));
    SwrOptions o;
    o.mode = RunMode::ngf;
    o.tc.mu = 2.0;
    o.ngf.dt = 0.2;
    o.ngf.delta = 1e-7;
    o.delta_sc = 1e-7;
    o.max_iterations = 30;
    const auto r = SchwarzSolver<double>(s.pb, o).run();
    EXPECT_TRUE(r.converged);
    for (const auto& e : r.energy) EXPECT_NEAR(e.norm, 1.0, 1e-12);
    // last sweep: energy non-increasing along imaginary time
    const int k = r.history.back().k;
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& e : r.energy)
        if (e.k == k) {
            EXPECT_LE(e.energy, prev + 1e-10);
            prev = e.energy;
        }
    EXPECT_NEAR(r.final_energy, 1.0, 0.05);  // harmonic ground state of two 1-d oscillators
}
