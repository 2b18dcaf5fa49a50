#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include <gtest/gtest.h>

#include "fimex/errors.hpp"
#include "fimex/stability.hpp"
#include "oracles.hpp"

using namespace fimex;

TEST(Amplification, TwoNodeClosedForm)
{
    const auto t = build_propagator(2, Variant::Radau);
    for (Complex z1 : {Complex(-1.0, 0.5), Complex(-7.0, -2.0), Complex(0.3, 3.0)}) {
        for (Complex z2 : {Complex(0.0, 0.0), Complex(-0.5, 0.25), Complex(0.2, -1.0)}) {
            const double expected = std::abs(1.0 + z2) / std::abs(1.0 - z1);
            EXPECT_NEAR(amplification_radius(t, z1, z2, 0), expected, 1e-14 * std::max(1.0, expected));
        }
    }
}

TEST(Amplification, ImplicitSliceIsRadauIIAStability)
{
    for (int q = 2; q <= 5; ++q) {
        const auto iia = oracle::radau_iia(q - 1);
        for (auto v : {Variant::Radau, Variant::RadauStar}) {
            const auto t = build_propagator(q, v);
            for (Complex z : {Complex(-0.5, 0.0), Complex(-3.0, 2.0), Complex(-20.0, -5.0), Complex(0.5, 1.0)}) {
                for (int kappa = 0; kappa <= 2; ++kappa) {
                    const double expected = std::abs(oracle::radau_iia_stability(iia, z));
                    EXPECT_NEAR(amplification_radius(t, z, 0.0, kappa), expected, 1e-12 * std::max(1.0, expected))
                        << "q=" << q << " z=" << z << " kappa=" << kappa;
                }
            }
        }
    }
}

TEST(Amplification, StiffDecayWithExplicitPartAtRest)
{
    const auto t = build_propagator(4, Variant::RadauStar);
    EXPECT_LT(amplification_radius(t, -1e8, 0.0, 1), 1e-6);
}

TEST(Amplification, PoleAndArguments)
{
    const auto t = build_propagator(2, Variant::Radau);
    EXPECT_THROW(amplification(t, {1.0, 0.0, 0}), PoleError);
    EXPECT_EQ(amplification_radius(t, 1.0, 0.0, 0), std::numeric_limits<double>::infinity());
    EXPECT_THROW(amplification(t, {0.0, 0.0, -1}), InvalidArgument);
}

TEST(SpectralRadius, KnownMatrices)
{
    Matrix rot(2, 2);
    rot << 0.0, -2.0, 2.0, 0.0;
    EXPECT_NEAR(spectral_radius(rot), 2.0, 1e-14);
    Matrix jordan(2, 2);
    jordan << 0.5, 100.0, 0.0, 0.5;
    EXPECT_NEAR(spectral_radius(jordan), 0.5, 1e-12);
    EXPECT_THROW(spectral_radius(Matrix::Zero(2, 3)), InvalidArgument);
    Matrix bad = Matrix::Zero(2, 2);
    bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(spectral_radius(bad), InvalidArgument);
}

TEST(Grid, CoordinatesAndValidation)
{
    Grid g{-1.0, 1.0, -2.0, 2.0, 5, 9};
    EXPECT_DOUBLE_EQ(g.re(0), -1.0);
    EXPECT_DOUBLE_EQ(g.re(4), 1.0);
    EXPECT_DOUBLE_EQ(g.im(8), 2.0);
    EXPECT_DOUBLE_EQ(g.cell_area(), 0.5 * 0.5);
    EXPECT_NO_THROW(validate(g));
    EXPECT_THROW(validate(Grid{-1.0, 1.0, -1.0, 1.0, 0, 3}), InvalidArgument);
    EXPECT_THROW(validate(Grid{1.0, -1.0, -1.0, 1.0, 3, 3}), InvalidArgument);
    EXPECT_THROW(validate(Grid{0.0, 0.0, -1.0, 1.0, 3, 3}), InvalidArgument);
}

TEST(Regions, TwoNodeSliceIsDisc)
{
    // rho <= 1 iff |1 + z2| <= |1 - z1| = 1 at z1 = 0.
    const auto t = build_propagator(2, Variant::Radau);
    const Grid g{-3.0, 1.0, -2.0, 2.0, 81, 81};
    const auto scan = region_S(0.0, t, 0, g);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const double d = std::abs(1.0 + g.point(i, j));
            if (std::abs(d - 1.0) > 1e-9) EXPECT_EQ(scan.stable(i, j), d < 1.0) << g.point(i, j);
        }
    }
    EXPECT_NEAR(scan.stable_area(), std::numbers::pi, 0.1);
}

TEST(Regions, HatIsSymmetricUnderConjugation)
{
    const auto t = build_propagator(4, Variant::RadauStar);
    const Grid g{-4.0, 2.0, -3.0, 3.0, 31, 31};
    const auto scan = region_S_hat({1.0, 3.0}, t, 1, g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double a = scan.rho[static_cast<std::size_t>(j) * g.nx + i];
            const double b = scan.rho[static_cast<std::size_t>(g.ny - 1 - j) * g.nx + i];
            EXPECT_NEAR(a, b, 1e-12 * std::max(1.0, a));
        }
    const auto plain = region_S({1.0, 3.0}, t, 1, g);
    for (std::size_t k = 0; k < plain.rho.size(); ++k) EXPECT_GE(scan.rho[k], plain.rho[k]);
}

TEST(Regions, ParallelScanMatchesSerial)
{
    const auto t = build_propagator(3, Variant::Radau);
    const Grid g{-4.0, 2.0, -3.0, 3.0, 25, 19};
    const auto a = region_S({-1.0, 2.0}, t, 1, g);
    const auto b = region_S({-1.0, 2.0}, t, 1, g, {true, 3});
    EXPECT_EQ(a.rho, b.rho);
}

TEST(Regions, WedgeIsIntersection)
{
    const auto t = build_propagator(3, Variant::RadauStar);
    const Grid g{-3.0, 1.0, -2.0, 2.0, 21, 21};
    WedgeSampling w{{0.0, 1.0, 10.0}, 2};
    const auto tilde = region_S_tilde(std::numbers::pi / 2, t, 1, g, w);
    for (double gamma : w.gammas)
        for (double omega : {std::numbers::pi / 2, std::numbers::pi}) {
            const auto slice = region_S_hat(std::polar(gamma, omega), t, 1, g);
            for (std::size_t k = 0; k < slice.rho.size(); ++k) EXPECT_GE(tilde.rho[k], slice.rho[k]);
        }
    EXPECT_THROW(region_S_tilde(4.0, t, 1, g), InvalidArgument);
    EXPECT_THROW(region_S_tilde(1.0, t, 1, g, WedgeSampling{{1.0, 0.5}, 2}), InvalidArgument);
}

TEST(MarchingSquares, TracesCircle)
{
    const Grid g{-2.0, 2.0, -2.0, 2.0, 81, 81};
    std::vector<double> field;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) field.push_back(std::norm(g.point(i, j)));
    const auto lines = marching_squares(g, field, 1.0);
    ASSERT_EQ(lines.size(), 1u);
    EXPECT_GT(lines[0].size(), 50u);
    for (const auto& p : lines[0]) EXPECT_NEAR(std::hypot(p[0], p[1]), 1.0, 5e-3);
    EXPECT_THROW(marching_squares(g, std::vector<double>(3, 0.0), 1.0), InvalidArgument);
}

TEST(MarchingSquares, NonFiniteCountsAsAbove)
{
    const Grid g{0.0, 1.0, 0.0, 1.0, 2, 2};
    const std::vector<double> field{0.0, std::numeric_limits<double>::infinity(), 0.0,
                                    std::numeric_limits<double>::quiet_NaN()};
    const auto lines = marching_squares(g, field, 1.0);
    ASSERT_EQ(lines.size(), 1u);
    for (const auto& p : lines[0]) EXPECT_TRUE(std::isfinite(p[0]) && std::isfinite(p[1]));
}

TEST(Export, CsvHeaders)
{
    const auto t = build_propagator(2, Variant::Radau);
    const auto scan = region_S(0.0, t, 0, Grid{-3.0, 1.0, -2.0, 2.0, 11, 11});
    const auto csv = scan_to_csv(scan);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "re_z2,im_z2,rho");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 121);
    const auto contour = contour_to_csv(scan);
    EXPECT_EQ(contour.substr(0, contour.find('\n')), "polyline,re_z2,im_z2");
}
