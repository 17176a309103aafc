#include <swr/potentials.hpp>

#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>

using namespace swr;

TEST(Mollifier, ScalingConstantsAreExactFractions) {
    EXPECT_EQ((Mollifier{1.0, 1}.sigma_fraction()), (std::pair<long long, long long>{3, 4}));
    EXPECT_EQ((Mollifier{1.0, 2}.sigma_fraction()), (std::pair<long long, long long>{15, 16}));
    EXPECT_EQ((Mollifier{1.0, 4}.sigma_fraction()), (std::pair<long long, long long>{315, 256}));
}

TEST(Mollifier, EndpointsPeakAndUnitMass) {
    for (double eps : {0.5, 0.1}) {
        const Mollifier m{eps, 4};
        EXPECT_EQ(m(eps), 0.0);
        EXPECT_EQ(m(-eps), 0.0);
        EXPECT_DOUBLE_EQ(m(0.0), 315.0 / 256.0 / eps);
        const double mass = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
            [&](double x) { return m(x); }, -eps, eps, 15, 1e-14);
        EXPECT_NEAR(mass, 1.0, 1e-10);
    }
    EXPECT_THROW((Mollifier{0.0, 4}.validate()), Error);
    EXPECT_THROW((Mollifier{0.1, 0}.validate()), Error);
}

TEST(Mollifier, ConvolutionErrorDecaysQuadratically) {
    // ||cos - cos * B_eps||_2 over one period, sampled on a fine grid.
    auto err = [](double eps) {
        const Mollifier m{eps, 4};
        const int n = 400;
        double s = 0;
        for (int i = 0; i < n; ++i) {
            const double x = -pi + 2.0 * pi * i / n;
            const double d = std::cos(x) - mollify([](double y) { return std::cos(y); }, m, x);
            s += d * d * 2.0 * pi / n;
        }
        return std::sqrt(s);
    };
    const double e1 = err(0.4), e2 = err(0.2), e3 = err(0.1);
    EXPECT_NEAR(e1 / e2, 4.0, 0.4);
    EXPECT_NEAR(e2 / e3, 4.0, 0.4);
}

TEST(SmoothedCoulomb, LineConvolutionIsSecondOrderAwayFromSupport) {
    std::vector<double> errs;
    for (double eps : {0.2, 0.1, 0.05}) {
        const SmoothedCoulomb g(Mollifier{eps, 4}, false, CoulombSmoothing::line);
        double e = 0;
        for (double x : {0.4, 0.7, 1.0, 1.5, -0.8}) e = std::max(e, std::abs(g(x) + 1.0 / std::abs(x)));
        errs.push_back(e);
    }
    EXPECT_NEAR(errs[0] / errs[1], 4.0, 0.4);
    EXPECT_NEAR(errs[1] / errs[2], 4.0, 0.4);
}

TEST(SmoothedCoulomb, RadialProfileIsFiniteAndMatchesCoulombOutside) {
    const SmoothedCoulomb g(Mollifier{0.5, 4});
    EXPECT_TRUE(std::isfinite(g(0.0)));
    EXPECT_LT(g(0.0), g(0.25));
    EXPECT_NEAR(g(0.5), -2.0, 1e-12);
    EXPECT_NEAR(g(0.49999999), -2.0, 1e-6);  // continuous at the support edge
    EXPECT_DOUBLE_EQ(g(1.3), -1.0 / 1.3);
    EXPECT_DOUBLE_EQ(g(-0.3), g(0.3));
    // smaller radius approaches -1/|x|
    EXPECT_LT(std::abs(SmoothedCoulomb(Mollifier{0.01, 4})(0.2) + 5.0), 1e-12);
    const SmoothedCoulomb s(Mollifier{0.5, 4}, true);
    EXPECT_NEAR(s(1.0), -1.0 / (4.0 * pi), 1e-15);
}

TEST(SmoothedCoulomb, Tabulation) {
    const SmoothedCoulomb g(Mollifier{0.2, 2});
    const std::vector<double> xs{-1.0, 0.0, 0.1, 2.0};
    const auto t = g.tabulate(xs);
    ASSERT_EQ(t.size(), xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) EXPECT_EQ(t[i], g(xs[i]));
}

TEST(Barrier, SmoothstepJunctions) {
    const double w = 0.5;
    EXPECT_EQ(smoothstep(-w / 2, w), 0.0);
    EXPECT_EQ(smoothstep(w / 2, w), 1.0);
    EXPECT_DOUBLE_EQ(smoothstep(0.0, w), 0.5);
    EXPECT_NEAR(smoothstep_derivative(-w / 2 + 1e-9, w), 0.0, 1e-12);
    EXPECT_NEAR(smoothstep_derivative(w / 2 - 1e-9, w), 0.0, 1e-12);
    const double h = 1e-6;
    EXPECT_NEAR((smoothstep(0.1 + h, w) - smoothstep(0.1 - h, w)) / (2 * h), smoothstep_derivative(0.1, w), 1e-7);
}

TEST(Barrier, PlateausInsideAndOutside) {
    const BarrierSpec b{2.0, 0.5, 1e3};
    EXPECT_EQ(barrier_value(b, 0.0), 0.0);
    EXPECT_EQ(a_eps(b, 0.0), 1.0);
    EXPECT_EQ(barrier_value(b, 5.0), 1e3);
    EXPECT_EQ(a_eps(b, -5.0), 0.0);
    EXPECT_DOUBLE_EQ(barrier_value(b, 2.0), 500.0);
    EXPECT_THROW((BarrierSpec{1.0, 0.0, 1.0}.validate()), Error);
}

TEST(Softcore, TwoNucleusValueAndSymmetry) {
    const NucleusSet n{{-1.25, 1.25}, {1.0, 1.0}};
    EXPECT_DOUBLE_EQ(softcore_potential(n, 0.2, 0.0), -2.0 / std::sqrt(1.6025));
    for (double x : {0.3, 1.1, 4.0}) EXPECT_DOUBLE_EQ(softcore_potential(n, 0.2, x), softcore_potential(n, 0.2, -x));
    EXPECT_LT(std::abs(softcore_potential(n, 1e8, 0.5)), 1e-7);
    EXPECT_THROW((NucleusSet{{0.0}, {}}.validate()), Error);
}

TEST(Laser, CircularAndLinearPolarization) {
    const LaserField f{1.0, 8.0, 10.0, 2.5, Polarization::circular};
    const auto [ex, ey] = f(1.25);
    EXPECT_DOUBLE_EQ(ex, std::cos(8.0 * 1.25));
    EXPECT_DOUBLE_EQ(ey, std::sin(8.0 * 1.25));
    const auto [a, b] = f(0.0);
    EXPECT_NEAR(std::hypot(a, b), std::exp(-10.0 * 1.25 * 1.25), 1e-15);
    LaserField lin = f;
    lin.polarization = Polarization::linear_scalar;
    const auto [lx, ly] = lin(0.7);
    EXPECT_EQ(lx, ly);
}

TEST(PotentialSpec, TabulationIsSymmetricUnderSwap) {
    PotentialSpec p;
    p.nuclear = NuclearModel::softcore;
    p.nuclei = {{-0.5, 0.5}, {1.0, 1.0}};
    p.interaction = InteractionModel::softcore;
    p.eta_ee = 0.3;
    const GlobalGrid g(-3, 3, -3, 3, 31, 31);
    const auto v = p.tabulate(g);
    for (int i = 0; i < 31; ++i)
        for (int j = 0; j < 31; ++j) EXPECT_DOUBLE_EQ(v[g.at(i, j)], v[g.at(j, i)]);
    const double x1 = g.x1.x(3), x2 = g.x2.x(20);
    EXPECT_NEAR(v[g.at(3, 20)],
                softcore_potential(p.nuclei, 0.2, x1) + softcore_potential(p.nuclei, 0.2, x2) +
                    1.0 / std::sqrt((x1 - x2) * (x1 - x2) + 0.09),
                1e-14);
    EXPECT_TRUE(PotentialSpec{}.is_zero());
}
