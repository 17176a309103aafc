#include <swr/reconstruct.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace swr;

namespace {
std::vector<MatR> constant_tables(const SubdomainLayout& lay, const std::vector<double>& values) {
    std::vector<MatR> t;
    for (const auto& d : lay.subdomains) t.push_back(MatR::Constant(d.i1.size(), d.i2.size(), values[d.index - 1]));
    return t;
}
}  // namespace

TEST(Reconstruct, TwoWayAndFourWayAveraging) {
    const auto lay = build_layout(GlobalGrid(-2, 2, -2, 2, 41, 41), 2, OverlapSpec{std::nullopt, std::nullopt, 0.4});
    const auto f = reconstruct_from_tables<double>(lay, constant_tables(lay, {1.0, 1.0, 1.0, 5.0}));
    const int mid = 20;
    EXPECT_DOUBLE_EQ(f(mid, mid), 2.0);  // corner zone of all four
    EXPECT_DOUBLE_EQ(f(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(f(40, 40), 5.0);
    EXPECT_DOUBLE_EQ(f(40, mid), 3.0);  // subdomains 2 and 4
    const auto g = reconstruct_from_tables<double>(lay, constant_tables(lay, {2.0, 4.0, 0.0, 0.0}));
    EXPECT_DOUBLE_EQ(g(mid, 0), 3.0);
}

TEST(Reconstruct, PartitionOfUnity) {
    const auto lay = build_layout(GlobalGrid(-15, 15, -15, 15, 201, 201), 5, OverlapSpec{std::nullopt, std::nullopt, 0.1});
    const auto f = reconstruct_from_tables<double>(lay, constant_tables(lay, std::vector<double>(25, 1.0)));
    for (double v : f.values) EXPECT_DOUBLE_EQ(v, 1.0);
}

TEST(Reconstruct, MatchesSingleDomainFieldWhenBasesAgree) {
    const auto lay = build_layout(GlobalGrid(-4, 4, -4, 4, 33, 33), 2, OverlapSpec{std::nullopt, std::nullopt, 0.25});
    // every subdomain carries the same global basis and coefficients
    const auto b = gaussian_basis_from_centres(lay.grid, 1, {-1.0, 1.0}, {0.0}, 0.5);
    VecR c(2);
    c << 1.0, -2.0;
    std::vector<LocalBasis> bases(4, b);
    const auto f = reconstruct_global<double>(lay, bases, std::vector<VecR>(4, c));
    for (int i = 0; i < 33; ++i)
        for (int j = 0; j < 33; ++j) EXPECT_NEAR(f(i, j), b.value(0, i, j) - 2.0 * b.value(1, i, j), 1e-14);
}

TEST(Norms, GaussianAndScaling) {
    const GlobalGrid g(-8, 8, -8, 8, 161, 161);
    auto f = tabulate_field<double>(g, [](double x, double y) { return std::exp(-(x * x + y * y)); });
    EXPECT_NEAR(field_norm(f), std::sqrt(pi / 2), 1e-10);
    const double n = field_norm(f);
    for (auto& v : f.values) v *= -3.0;
    EXPECT_NEAR(field_norm(f), 3.0 * n, 1e-12);
    EXPECT_EQ(field_norm(GlobalField<double>(g)), 0.0);
    EXPECT_THROW(field_l2_diff(f, GlobalField<double>(GlobalGrid(-8, 8, -8, 8, 11, 11))), Error);
}

TEST(Antisymmetric, SigmaReconstructionOnNonOverlappingLayout) {
    const auto lay = build_layout(GlobalGrid(-5, 5, -5, 5, 101, 101), 5, OverlapSpec{0.0, 0.0, std::nullopt});
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> ud(-1.0, 1.0);
    std::map<int, LocalBasis> bases;
    std::map<int, VecR> coeffs;
    for (const auto& d : lay.subdomains) {
        if (d.r < d.s) continue;
        const auto c1 = uniform_centres(d.block1_lo, d.block1_hi, 3);
        const auto c2 = uniform_centres(d.block2_lo, d.block2_hi, 3);
        LocalBasis b = d.r == d.s ? gaussian_determinant_basis(lay.grid, d.index, c1, c1, 2.0)
                                  : gaussian_basis_from_centres(lay.grid, d.index, c1, c2, 2.0);
        VecR c(b.size());
        for (int l = 0; l < c.size(); ++l) c[l] = ud(rng);
        bases.emplace(d.index, std::move(b));
        coeffs.emplace(d.index, std::move(c));
    }
    const auto f = antisym_reconstruct<double>(lay, bases, coeffs);
    double scale = 0;
    for (double v : f.values) scale = std::max(scale, std::abs(v));
    EXPECT_GT(scale, 1e-3);
    EXPECT_LE(antisymmetry_defect(f), 1e-12);

    const auto overlapping = build_layout(GlobalGrid(-5, 5, -5, 5, 101, 101), 5, OverlapSpec{std::nullopt, std::nullopt, 0.2});
    EXPECT_THROW(antisym_reconstruct<double>(overlapping, bases, coeffs), Error);
    coeffs.erase(2);
    EXPECT_THROW(antisym_reconstruct<double>(lay, bases, coeffs), Error);
}

TEST(Output, BinaryAndCsvWriters) {
    const GlobalGrid g(0, 1, 0, 2, 3, 5);
    auto f = tabulate_field<double>(g, [](double x, double y) { return x + 10 * y; });
    const std::string bin = ::testing::TempDir() + "/field.bin", csv = ::testing::TempDir() + "/field.csv";
    write_grid_binary(bin, f);
    write_grid_csv(csv, f);
    std::ifstream is(bin, std::ios::binary);
    std::string magic, kind;
    int n1 = 0, n2 = 0;
    double a, b, c, d;
    is >> magic >> kind >> n1 >> n2 >> a >> b >> c >> d;
    is.get();
    std::vector<double> back(15);
    is.read(reinterpret_cast<char*>(back.data()), 15 * sizeof(double));
    EXPECT_EQ(magic, "swr-grid");
    EXPECT_EQ(kind, "real");
    EXPECT_EQ(n1, 3);
    EXPECT_EQ(n2, 5);
    EXPECT_EQ(back, f.values);
    std::ifstream cs(csv);
    std::string header;
    std::getline(cs, header);
    EXPECT_EQ(header, "x1,x2,value");
}
