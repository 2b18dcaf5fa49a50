#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "fimex/errors.hpp"
#include "fimex/nodes.hpp"
#include "oracles.hpp"

using namespace fimex;

TEST(Nodes, MatchLegendreCharacterization)
{
    for (int q = kMinNodes; q <= kMaxNodes; ++q) {
        const auto z = radau_nodes(q);
        const auto expected = oracle::block_nodes(q);
        ASSERT_EQ(z.size(), expected.size());
        for (std::size_t j = 0; j < z.size(); ++j) EXPECT_NEAR(z[j], expected[j], 1e-14) << "q=" << q << " j=" << j;
    }
}

TEST(Nodes, EndpointsExact)
{
    for (int q = kMinNodes; q <= kMaxNodes; ++q) {
        const auto z = radau_nodes(q);
        EXPECT_EQ(z.q, q);
        EXPECT_EQ(z[0], -1.0);
        EXPECT_EQ(z[z.size() - 1], 1.0);
        for (std::size_t j = 1; j < z.size(); ++j) EXPECT_LT(z[j - 1], z[j]);
    }
}

TEST(Nodes, KnownValues)
{
    // q = 3: Radau IIA(2) points 1/3, 1 on [0, 1].
    const auto z3 = radau_nodes(3);
    EXPECT_NEAR(z3[1], -1.0 / 3.0, 1e-15);
    // q = 4: (4 -+ sqrt 6)/10 on [0, 1].
    const auto z4 = radau_nodes(4);
    EXPECT_NEAR(z4[1], 2.0 * (4.0 - std::sqrt(6.0)) / 10.0 - 1.0, 1e-15);
    EXPECT_NEAR(z4[2], 2.0 * (4.0 + std::sqrt(6.0)) / 10.0 - 1.0, 1e-15);
}

TEST(Nodes, TabulatedSeedsAreClose)
{
    for (int q = 2; q <= 8; ++q) {
        const auto table = tabulated_radau_nodes(q);
        const auto z = radau_nodes(q);
        ASSERT_EQ(table.size(), z.size());
        for (std::size_t j = 0; j < z.size(); ++j) EXPECT_NEAR(table[j], z[j], 1e-13);
    }
}

TEST(Nodes, DefiningPolynomialVanishesAtNodes)
{
    for (int q = 3; q <= kMaxNodes; ++q) {
        const auto coeffs = radau_defining_polynomial(q);
        const auto z = radau_nodes(q);
        long double scale = 0;
        for (auto c : coeffs) scale += std::fabs(static_cast<long double>(c));
        for (std::size_t j = 1; j < z.size(); ++j) {
            const long double x = (static_cast<long double>(z[j]) + 1.0L) / 2.0L;
            EXPECT_LT(std::fabs(evaluate_polynomial(coeffs, x)) / scale, 1e-13) << "q=" << q;
        }
    }
}

TEST(Nodes, RejectsUnsupportedOrders)
{
    EXPECT_THROW(radau_nodes(1), UnsupportedOrder);
    EXPECT_THROW(radau_nodes(10), UnsupportedOrder);
    EXPECT_THROW(tabulated_radau_nodes(9), UnsupportedOrder);
}

TEST(QuadWeights, MatchExpandedLagrangeIntegrals)
{
    for (int q = 2; q <= kMaxNodes; ++q) {
        const auto z = radau_nodes(q).z;
        std::vector<double> inner(z.begin() + 1, z.end());
        std::vector<double> shifted;
        for (double v : z) shifted.push_back(v + 2.0);
        const auto w = quad_weights(z, 1.0, shifted);
        const auto expected = oracle::lagrange_weights(z, 1.0, shifted);
        // Extrapolation to [1, 3] makes these weights large; compare relative to their size.
        EXPECT_LT((w - expected).cwiseAbs().maxCoeff(), 1e-13 * std::max(1.0, expected.cwiseAbs().maxCoeff())) << "q=" << q;
        const auto wi = quad_weights(inner, -1.0, z);
        const auto ei = oracle::lagrange_weights(inner, -1.0, z);
        EXPECT_LT((wi - ei).cwiseAbs().maxCoeff(), 1e-12) << "q=" << q;
    }
}

TEST(QuadWeights, ExactOnPolynomials)
{
    const std::vector<double> nodes{-0.7, -0.1, 0.4, 0.9};
    const std::vector<double> bounds{0.3, 1.5, -2.0};
    const auto w = quad_weights(nodes, -1.0, bounds);
    auto p = [](double x) { return 2.0 - x + 3.0 * x * x - 0.5 * x * x * x; };
    auto integral = [](double x) { return 2.0 * x - 0.5 * x * x + x * x * x - 0.125 * x * x * x * x; };
    for (std::size_t i = 0; i < bounds.size(); ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < nodes.size(); ++j) sum += w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * p(nodes[j]);
        EXPECT_NEAR(sum, integral(bounds[i]) - integral(-1.0), 1e-13);
    }
}

TEST(QuadWeights, SingleNode)
{
    const std::vector<double> nodes{1.0};
    const std::vector<double> bounds{-1.0, 1.0};
    const auto w = quad_weights(nodes, -1.0, bounds);
    EXPECT_EQ(w(0, 0), 0.0);
    EXPECT_DOUBLE_EQ(w(1, 0), 2.0);
}

TEST(QuadWeights, RejectsRepeatedNodes)
{
    const std::vector<double> nodes{0.0, 0.5, 0.5};
    const std::vector<double> bounds{1.0};
    EXPECT_THROW(quad_weights(nodes, 0.0, bounds), DegenerateInterpolation);
}
