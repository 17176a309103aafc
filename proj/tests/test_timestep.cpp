#include <swr/timestep.hpp>

#include <gtest/gtest.h>

using namespace swr;

TEST(ImplicitEuler, ScalarDecay) {
    MatR a = MatR::Identity(1, 1), h(1, 1);
    const double lambda = 2.0;
    h(0, 0) = lambda;
    VecR c(1);
    c[0] = 1.0;
    for (double dt : {0.1, 0.05, 0.025}) {
        const VecR n = ngf_step(a, h, c, nullptr, dt);
        EXPECT_DOUBLE_EQ(n[0], 1.0 / (1.0 + dt * lambda));
        EXPECT_NEAR(n[0], std::exp(-lambda * dt), lambda * lambda * dt * dt);
    }
    // shifted step solves (A + dt (H - s A)) c~ = A c
    const VecR s = ngf_step(a, h, c, nullptr, 0.1, 1.5);
    EXPECT_DOUBLE_EQ(s[0], 1.0 / (1.0 + 0.1 * 0.5));
    VecR b(1);
    b[0] = 3.0;
    EXPECT_DOUBLE_EQ(ngf_step(a, h, c, &b, 0.1)[0], (1.0 + 0.3) / 1.2);
}

TEST(ImplicitEuler, FirstOrderAgainstFineStepReference) {
    // A smooth mode of the free heat flow; errors at t = 1 against a run with
    // a 64 times smaller step should halve with the step.
    const auto lay = build_layout(GlobalGrid(-6, 6, -6, 6, 61, 61), 1, {});
    const auto basis = gaussian_basis(lay, 1, 8, 0.8);
    const auto& d = lay.sub(1);
    const MatR A = assemble_overlap(basis, d);
    const MatR H = assemble_hamiltonian_core(basis, d, lay.grid, {});
    const auto phi0 = tabulate_field<double>(lay.grid, [](double x, double y) { return std::cos(0.5 * x) * std::exp(-0.1 * (x * x + y * y)); });
    const VecR c0 = project_initial(basis, A, field_slice(phi0, d.i1, d.i2), d.i1, d.i2).coefficients;
    auto run = [&](int steps) {
        const NgfStepper st(A, H, 1.0 / steps);
        VecR c = c0;
        for (int n = 0; n < steps; ++n) c = st.step(c, nullptr);
        return c;
    };
    const VecR ref = run(64 * 40);
    auto err = [&](int steps) {
        const VecR e = run(steps) - ref;
        return std::sqrt(e.dot(A * e));
    };
    const double e1 = err(10), e2 = err(20), e3 = err(40);
    EXPECT_NEAR(e1 / e2, 2.0, 0.2);
    EXPECT_NEAR(e2 / e3, 2.0, 0.2);
    // the mode decays
    EXPECT_LT(std::sqrt(ref.dot(A * ref)), std::sqrt(c0.dot(A * c0)));
}

TEST(CrankNicolson, CayleyStepIsUnitaryInTheMassNorm) {
    const auto lay = build_layout(GlobalGrid(-6, 6, -6, 6, 61, 61), 1, {});
    const auto basis = gaussian_basis(lay, 1, 5, 0.6);
    const MatR A = assemble_overlap(basis, lay.sub(1));
    const MatR H = assemble_hamiltonian_core(basis, lay.sub(1), lay.grid, {});
    VecC c(basis.size());
    for (int l = 0; l < c.size(); ++l) c[l] = cplx(std::cos(0.7 * l), std::sin(0.3 * l));
    const double n0 = std::real(c.dot(A.cast<cplx>() * c));
    const MatC Hc = H.cast<cplx>();
    for (int n = 0; n < 20; ++n) {
        c = tdse_step(A, Hc, c, nullptr, nullptr, nullptr, nullptr, 0.05);
        EXPECT_NEAR(std::real(c.dot(A.cast<cplx>() * c)) / n0, 1.0, 1e-12);
    }
}

TEST(CrankNicolson, MatchesFreeEvolutionOfAFiniteDifferenceOracle) {
    // Separable free Gaussian: the 2-d oracle is the outer product of a fine
    // 1-d finite-difference Crank-Nicolson solution.
    const double L = 5.0, t_end = 0.5;
    const int fine = 1601, stride = 10;
    const double hf = 2 * L / (fine - 1), dtf = 1e-3;
    std::vector<cplx> u(fine);
    for (int i = 0; i < fine; ++i) {
        const double x = -L + i * hf;
        u[i] = std::exp(-x * x);
    }
    {
        const cplx r(0.0, dtf / (4.0 * hf * hf));  // i dt/2 * (1/2) / h^2
        std::vector<cplx> cp(fine), dp(fine), rhs(fine);
        for (int n = 0; n < static_cast<int>(std::lround(t_end / dtf)); ++n) {
            for (int i = 0; i < fine; ++i) {
                const cplx l = i > 0 ? u[i - 1] : 0.0, rr = i + 1 < fine ? u[i + 1] : 0.0;
                rhs[i] = u[i] + r * (l - 2.0 * u[i] + rr);
            }
            // (1 + 2r) u_i - r u_{i-1} - r u_{i+1} = rhs_i, Thomas sweep
            const cplx diag = 1.0 + 2.0 * r, off = -r;
            cp[0] = off / diag;
            dp[0] = rhs[0] / diag;
            for (int i = 1; i < fine; ++i) {
                const cplx m = diag - off * cp[i - 1];
                cp[i] = off / m;
                dp[i] = (rhs[i] - off * dp[i - 1]) / m;
            }
            u[fine - 1] = dp[fine - 1];
            for (int i = fine - 2; i >= 0; --i) u[i] = dp[i] - cp[i] * u[i + 1];
        }
    }

    const GlobalGrid g(-L, L, -L, L, (fine - 1) / stride + 1, (fine - 1) / stride + 1);
    const auto lay = build_layout(g, 1, {});
    const auto basis = gaussian_basis(lay, 1, 24, 2.0);
    const auto& d = lay.sub(1);
    const MatR A = assemble_overlap(basis, d);
    const MatC H = assemble_hamiltonian_core(basis, d, g, {}).cast<cplx>();
    const auto phi0 = tabulate_field<double>(g, [](double x, double y) { return std::exp(-x * x - y * y); });
    VecC c = project_initial(basis, A, field_slice(phi0, d.i1, d.i2), d.i1, d.i2).coefficients.cast<cplx>();
    const double dt = 0.005;
    for (int n = 0; n < static_cast<int>(std::lround(t_end / dt)); ++n)
        c = tdse_step(A, H, c, nullptr, nullptr, nullptr, nullptr, dt);
    const auto got = reconstruct_global<cplx>(lay, {basis}, {c});
    GlobalField<cplx> oracle(g);
    for (int i = 0; i < g.x1.n; ++i)
        for (int j = 0; j < g.x2.n; ++j) oracle(i, j) = u[i * stride] * u[j * stride];
    EXPECT_LE(field_l2_diff(got, oracle), 1e-4);
}

TEST(Normalize, GlobalNormIsOneAfterTheCall) {
    const auto lay = build_layout(GlobalGrid(-15, 15, -15, 15, 101, 101), 5, OverlapSpec{std::nullopt, std::nullopt, 0.1});
    std::vector<LocalBasis> bases;
    std::vector<VecR> c;
    for (int i = 1; i <= 25; ++i) {
        bases.push_back(gaussian_basis(lay, i, 3, 0.5));
        c.push_back(VecR::Constant(bases.back().size(), 0.1 * i));
    }
    const double n = normalize_global<double>(lay, bases, c);
    EXPECT_GT(n, 0.0);
    EXPECT_NEAR(field_norm(reconstruct_global<double>(lay, bases, c)), 1.0, 1e-12);
    std::vector<VecR> zero(25);
    for (int i = 0; i < 25; ++i) zero[i] = VecR::Zero(bases[i].size());
    EXPECT_THROW(normalize_global<double>(lay, bases, zero), Error);
}

TEST(Antisymmetrize, IdempotentAndAntisymmetric) {
    const GlobalGrid g(-3, 3, -3, 3, 41, 41);
    const auto f = tabulate_field<double>(g, [](double x, double y) { return std::exp(-x * x - 0.3 * y * y) + 0.2 * x; });
    const auto a = antisymmetrize_field(f);
    const auto aa = antisymmetrize_field(a);
    EXPECT_EQ(a.values, aa.values);
    EXPECT_EQ(antisymmetry_defect(a), 0.0);
    for (int i = 0; i < 41; ++i) EXPECT_EQ(a(i, i), 0.0);
    EXPECT_THROW(antisymmetrize_field(GlobalField<double>(GlobalGrid(-1, 1, -2, 2, 5, 5))), Error);
}

TEST(Energy, DiscreteModeKineticValue) {
    const double W = 10.0;
    const GlobalGrid g(0, W, 0, W, 401, 401);
    const int k1 = 3, k2 = 1;
    auto f = tabulate_field<double>(g, [&](double x, double y) { return std::sin(k1 * pi * x / W) * std::sin(k2 * pi * y / W); });
    const double n = field_norm(f);
    for (auto& v : f.values) v /= n;
    const double exact = 0.5 * (k1 * k1 + k2 * k2) * pi * pi / (W * W);
    EXPECT_NEAR(energy<double>(f, {}) / exact, 1.0, 1e-3);
    // constant potential V adds V per unit norm
    std::vector<double> v(g.size(), 2.0);
    EXPECT_NEAR(energy<double>(f, v) - energy<double>(f, {}), 2.0, 1e-12);
}

TEST(Configs, Validation) {
    EXPECT_THROW((NgfConfig{0.0}.validate()), Error);
    NgfConfig bad;
    bad.delta = 0;
    EXPECT_THROW(bad.validate(), Error);
    TdseConfig t;
    EXPECT_EQ(t.steps(), 50);
    t.dt = -1;
    EXPECT_THROW(t.validate(), Error);
}
