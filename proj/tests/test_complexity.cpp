#include <swr/complexity.hpp>

#include <gtest/gtest.h>

using namespace swr;

TEST(CostModel, StationaryUniformExample) {
    ComplexityModel m;
    m.K_tot = 700;
    m.L = 5;
    m.beta = 2;
    m.N_k = {100, 100, 100};
    const auto e = cc_stationary(m);
    EXPECT_EQ(e.value, 5.88e6);
    EXPECT_EQ(e.uniform_value, 5.88e6);
    EXPECT_EQ(e.attractiveness, 300.0 / 25.0);
}

TEST(CostModel, TimeDependentUniformExample) {
    ComplexityModel m;
    m.K_tot = 900;
    m.L = 5;
    m.beta = 2;
    m.n_T = 50;
    m.k_cvg = 20;
    const auto e = cc_tdse(m);
    EXPECT_EQ(e.value, 3.24e7);
    EXPECT_EQ(e.attractiveness, 20.0 / 25.0);
}

TEST(CostModel, SingleDomainHasNoGain) {
    ComplexityModel m;
    m.K_tot = 100;
    m.L = 1;
    m.beta = 2.5;
    m.N_k = {7};
    EXPECT_EQ(m.gain(), 1.0);
    const auto e = cc_stationary(m);
    EXPECT_DOUBLE_EQ(e.value, 7 * std::pow(100.0, 2.5));
    EXPECT_EQ(e.attractiveness, 7.0);
}

TEST(CostModel, PerSubdomainFormIsLinearInCounts) {
    ComplexityModel m;
    m.L = 2;
    m.K_tot = 40;
    m.K_p = {10, 10, 10, 10};
    m.n_pk = {{1, 2, 3, 4}, {5, 6, 7, 8}};
    const double v = cc_stationary(m).value;
    EXPECT_EQ(v, 36 * 100.0);
    for (auto& row : m.n_pk)
        for (auto& n : row) n *= 2;
    EXPECT_EQ(cc_stationary(m).value, 2 * v);
    // uniform reading takes the per-iteration maximum
    EXPECT_EQ(sum_counts(m), 2.0 * (4 + 8));
    m.n_pk = {{0, 0, 0, 0}};
    EXPECT_EQ(cc_stationary(m).value, 0.0);
}

TEST(CostModel, TimeDependentPerSubdomain) {
    ComplexityModel m;
    m.L = 3;
    m.beta = 1.5;
    m.K_p = std::vector<double>(9, 16.0);
    m.K_tot = 144;
    m.n_T = 10;
    m.k_cvg = 4;
    EXPECT_DOUBLE_EQ(cc_tdse(m).value, 10 * 4 * 9 * 64.0);
}

TEST(CostModel, ValidationErrors) {
    ComplexityModel m;
    m.K_tot = 10;
    m.beta = 3.0;
    EXPECT_THROW(cc_stationary(m), Error);
    m.beta = 2;
    m.K_p = {10, -1};
    EXPECT_THROW(cc_stationary(m), Error);
    m.K_p = {10, 10};
    m.n_pk = {{1, 2, 3}};
    EXPECT_THROW(cc_stationary(m), Error);
    m.n_pk.clear();
    m.k_cvg = -1;
    EXPECT_THROW(cc_tdse(m), Error);
}

TEST(BetaFit, RecoversPowerLaw) {
    const std::vector<double> n{10, 20, 40, 80};
    std::vector<double> t;
    for (double k : n) t.push_back(3e-6 * std::pow(k, 2.5));
    const auto f = fit_beta(n, t);
    EXPECT_NEAR(f.beta, 2.5, 1e-12);
    EXPECT_NEAR(std::exp(f.log_prefactor), 3e-6, 1e-15);
    EXPECT_THROW(fit_beta({10}, {1}), Error);
    EXPECT_THROW(fit_beta({10, 10}, {1, 2}), Error);
    EXPECT_THROW(fit_beta({10, 20}, {1, -2}), Error);
}

TEST(BetaFit, CalibrationProducesFiniteExponent) {
    const auto f = calibrate_beta(20);
    ASSERT_EQ(f.sizes.size(), 4u);
    EXPECT_TRUE(std::isfinite(f.beta));
    EXPECT_GT(f.beta, 0.0);
}

TEST(Counters, SolveCountCrossCheck) {
    Counters c;
    c.solves = 21;
    c.n_pk = {{5, 5}, {6, 5}};
    EXPECT_EQ(c.logged_steps(), 21);
    auto j = c.to_json();
    EXPECT_TRUE(j["solves_match_log"].get<bool>());
    c.solves = 0;
    c.n_pk.clear();
    EXPECT_TRUE(c.to_json()["solves_match_log"].get<bool>());
    c.solves = 1;
    EXPECT_FALSE(c.to_json()["solves_match_log"].get<bool>());
}
