#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "fimex/errors.hpp"
#include "fimex/tableaux.hpp"
#include "oracles.hpp"

using namespace fimex;

namespace {

double max_diff(const RealMatrix& a, const Eigen::MatrixXd& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

TEST(Tableaux, QuadraticAndCubicTables)
{
    const auto r2 = build_propagator(2, Variant::Radau);
    Eigen::MatrixXd b(2, 2);
    b << 0, 0, 0, 2;
    EXPECT_LT(max_diff(r2.B1, b), 1e-14);
    EXPECT_LT(max_diff(r2.B2, b), 1e-14);
    Eigen::MatrixXd b2s(2, 2);
    b2s << 0, 0, -1, 3;
    EXPECT_LT(max_diff(build_propagator(2, Variant::RadauStar).B2, b2s), 1e-14);

    const auto r3 = build_propagator(3, Variant::Radau);
    Eigen::MatrixXd b1(3, 3), b2(3, 3), b3s(3, 3);
    b1 << 0, 0, 0, 0, 5.0 / 6, -1.0 / 6, 0, 1.5, 0.5;
    b2 << 0, 0, 0, 0, -1.0 / 6, 5.0 / 6, 0, -1.5, 3.5;
    b3s << 0, 0, 0, 8.0 / 27, -11.0 / 18, 53.0 / 54, 4, -7.5, 5.5;
    EXPECT_LT(max_diff(r3.B1, b1), 1e-13);
    EXPECT_LT(max_diff(r3.B2, b2), 1e-13);
    EXPECT_LT(max_diff(build_propagator(3, Variant::RadauStar).B2, b3s), 1e-13);
}

TEST(Tableaux, StructuralInvariants)
{
    for (int q = 2; q <= kMaxNodes; ++q) {
        for (auto v : {Variant::Radau, Variant::RadauStar}) {
            const auto t = build_propagator(q, v);
            EXPECT_TRUE(t.B_it == t.B1);
            for (int i = 0; i < q; ++i) {
                EXPECT_EQ(t.B1(0, i), 0.0);
                EXPECT_EQ(t.B2(0, i), 0.0);
                EXPECT_EQ(t.B1(i, 0), 0.0);
                for (int j = 0; j < q; ++j) {
                    EXPECT_EQ(t.A(i, j), j == q - 1 ? 1.0 : 0.0);
                    EXPECT_EQ(t.A_tilde(i, j), j == 0 ? 1.0 : 0.0);
                }
                if (v == Variant::Radau) EXPECT_EQ(t.B2(i, 0), 0.0);
            }
            for (int i = 1; i < q; ++i) {
                const double target = t.nodes[static_cast<std::size_t>(i)] + 1.0;
                EXPECT_NEAR(t.B1.row(i).sum(), target, 1e-12);
                EXPECT_NEAR(t.B2.row(i).sum(), target, 1e-10);
            }
        }
    }
}

TEST(Tableaux, ImplicitPartIsRadauIIA)
{
    // Rows 2..q, columns 2..q of B1 are twice the Radau IIA matrix.
    for (int q = 2; q <= kMaxNodes; ++q) {
        const auto t = build_propagator(q, Variant::Radau);
        const auto iia = oracle::radau_iia(q - 1);
        const Eigen::MatrixXd block = t.B1.block(1, 1, q - 1, q - 1);
        EXPECT_LT((block - 2.0 * iia.a).cwiseAbs().maxCoeff(), 1e-11) << "q=" << q;
    }
}

TEST(Tableaux, ExplicitWeightsIntegratePolynomialsExactly)
{
    for (int q = 3; q <= 6; ++q) {
        for (auto v : {Variant::Radau, Variant::RadauStar}) {
            const auto t = build_propagator(q, v);
            const int degree = v == Variant::Radau ? q - 2 : q - 1;
            std::vector<oracle::ld> coeffs(static_cast<std::size_t>(degree) + 1);
            for (int k = 0; k <= degree; ++k) coeffs[static_cast<std::size_t>(k)] = 1.0L / (k + 1) * (k % 2 ? -1 : 1);
            for (int i = 1; i < q; ++i) {
                double sum = 0.0;
                for (int j = 0; j < q; ++j)
                    sum += t.B2(i, j) * static_cast<double>(oracle::eval_poly(coeffs, t.nodes[static_cast<std::size_t>(j)]));
                // Interpolant through the input nodes is p itself; it is integrated over [1, z_i + 2].
                const double direct = static_cast<double>(
                    oracle::integrate_poly(coeffs, 1.0L, static_cast<oracle::ld>(t.nodes[static_cast<std::size_t>(i)]) + 2.0L));
                EXPECT_NEAR(sum, direct, 1e-10 * std::max(1.0, std::abs(direct))) << "q=" << q << " i=" << i;
            }
        }
    }
}

TEST(Tableaux, IteratorMatchesPropagatorImplicitWeights)
{
    for (int q = 2; q <= kMaxNodes; ++q) {
        const auto it = build_iterator(q);
        const auto t = build_propagator(q, Variant::RadauStar);
        EXPECT_TRUE(it.B_it == t.B1);
        EXPECT_TRUE(it.A_tilde == t.A_tilde);
    }
    const auto it2 = build_iterator(2);
    EXPECT_EQ(it2.A_tilde(1, 0), 1.0);
    EXPECT_DOUBLE_EQ(it2.B_it(1, 1), 2.0);
}

TEST(Tableaux, ExpectedOrders)
{
    EXPECT_EQ(expected_order(Variant::Radau, 3, 0), 2);
    EXPECT_EQ(expected_order(Variant::Radau, 5, 1), 5);
    EXPECT_EQ(expected_order(Variant::Radau, 5, 4), 7);
    EXPECT_EQ(expected_order(Variant::RadauStar, 4, 0), 4);
    EXPECT_EQ(expected_order(Variant::RadauStar, 4, 2), 5);
    EXPECT_EQ(expected_order(Variant::RadauStar, 5, 2), 7);
}

TEST(Tableaux, VariantNames)
{
    EXPECT_EQ(parse_variant("radau"), Variant::Radau);
    EXPECT_EQ(parse_variant("radau-star"), Variant::RadauStar);
    EXPECT_EQ(to_string(Variant::RadauStar), "radau-star");
    EXPECT_THROW(parse_variant("gauss"), InvalidArgument);
}

TEST(Glm, BlockLayoutForTwoNodes)
{
    const auto g = to_glm(build_propagator(2, Variant::Radau));
    ASSERT_EQ(g.U.rows(), 2);
    ASSERT_EQ(g.U.cols(), 6);
    Eigen::MatrixXd u(2, 6);
    u << 0, 1, 0, 0, 0, 0, 0, 1, 0, 0, 0, 2;
    EXPECT_LT((g.U - u).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_TRUE(g.V.topRows(2) == g.U);
}

TEST(Glm, StepMatchesCoefficientForm)
{
    const Complex l1(-1.0, 0.0), l2(0.3, 0.0);
    const double r = 0.05;
    for (int q = 2; q <= 5; ++q) {
        for (auto v : {Variant::Radau, Variant::RadauStar}) {
            const auto t = build_propagator(q, v);
            Eigen::VectorXcd y(q);
            for (int j = 0; j < q; ++j) y[j] = Complex(1.0 + 0.1 * j, -0.05 * j);
            // Coefficient form solved directly.
            const Eigen::MatrixXcd lhs = Eigen::MatrixXcd::Identity(q, q) - r * l1 * t.B1.cast<Complex>();
            const Eigen::VectorXcd rhs = t.A.cast<Complex>() * y + r * l2 * (t.B2.cast<Complex>() * y);
            const Eigen::VectorXcd direct = lhs.partialPivLu().solve(rhs);

            Eigen::VectorXcd aug(3 * q);
            aug << y, r * l1 * y, r * l2 * y;
            const auto out = glm_step_dahlquist(to_glm(t), aug, l1, l2, r);
            EXPECT_LT((out.head(q) - direct).cwiseAbs().maxCoeff(), 1e-14) << "q=" << q;
            EXPECT_LT((out.tail(q) - r * l2 * direct).cwiseAbs().maxCoeff(), 1e-14);
        }
    }
}

TEST(Coefficients, RoundTrip)
{
    for (int q = 2; q <= 4; ++q) {
        for (auto v : {Variant::Radau, Variant::RadauStar}) {
            const auto t = build_propagator(q, v);
            for (auto fmt : {CoeffFormat::Csv, CoeffFormat::Json}) {
                const auto back = import_coeffs(export_coeffs(t, fmt), fmt);
                EXPECT_EQ(back.q, q);
                EXPECT_EQ(back.variant, v);
                EXPECT_TRUE(back.A == t.A);
                EXPECT_TRUE(back.B1 == t.B1);
                EXPECT_TRUE(back.B2 == t.B2);
                EXPECT_TRUE(back.A_tilde == t.A_tilde);
                EXPECT_TRUE(back.B_it == t.B_it);
                EXPECT_EQ(back.nodes.z, t.nodes.z);
            }
        }
    }
}

TEST(Coefficients, CsvHeader)
{
    const auto text = export_coeffs(build_propagator(3, Variant::Radau), CoeffFormat::Csv);
    EXPECT_EQ(text.rfind("# q=3 variant=radau\nmatrix,row,col,value\n", 0), 0u);
}
