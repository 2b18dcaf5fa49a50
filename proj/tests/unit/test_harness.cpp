#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "fimex/errors.hpp"
#include "fimex/harness.hpp"

using namespace fimex;
namespace fs = std::filesystem;

TEST(FitOrder, ExactPowerLaw)
{
    std::vector<std::pair<double, double>> pts;
    for (double h : {0.1, 0.05, 0.025, 0.0125}) pts.emplace_back(h, 7.0 * h * h * h);
    const auto fit = fit_order(pts);
    EXPECT_NEAR(fit.order, 3.0, 1e-12);
    EXPECT_NEAR(std::exp(fit.intercept), 7.0, 1e-10);
    EXPECT_LT(fit.residual, 1e-12);
    EXPECT_EQ(fit.points, 4);
}

TEST(FitOrder, ConstantErrorHasZeroSlope)
{
    std::vector<std::pair<double, double>> pts{{0.1, 1e-3}, {0.01, 1e-3}, {0.001, 1e-3}};
    EXPECT_NEAR(fit_order(pts).order, 0.0, 1e-12);
}

TEST(FitOrder, NoisyFifthOrder)
{
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> jitter(0.9, 1.1);
    std::vector<std::pair<double, double>> pts;
    for (int k = 0; k < 12; ++k) {
        const double h = 0.1 * std::pow(0.7, k);
        pts.emplace_back(h, std::pow(h, 5) * jitter(rng));
    }
    const auto fit = fit_order(pts);
    EXPECT_GE(fit.order, 4.9);
    EXPECT_LE(fit.order, 5.1);
}

TEST(FitOrder, RejectsDegenerateInput)
{
    std::vector<std::pair<double, double>> one{{0.1, 1e-3}};
    EXPECT_THROW(fit_order(one), InvalidArgument);
    std::vector<std::pair<double, double>> invalid{{0.1, 0.0}, {0.05, -1.0}, {0.01, 1e-4}};
    EXPECT_THROW(fit_order(invalid), InvalidArgument);
    std::vector<std::pair<double, double>> same_h{{0.1, 1e-3}, {0.1, 2e-3}};
    EXPECT_THROW(fit_order(same_h), InvalidArgument);
}

TEST(Schedule, LogSpacedSteps)
{
    const auto steps = log_spaced_steps(0.5, 0.05, 1e-3, 30);
    ASSERT_FALSE(steps.empty());
    EXPECT_EQ(steps.front(), 10);
    EXPECT_EQ(steps.back(), 500);
    EXPECT_TRUE(std::is_sorted(steps.begin(), steps.end()));
    EXPECT_EQ(std::adjacent_find(steps.begin(), steps.end()), steps.end());
    EXPECT_THROW(log_spaced_steps(0.5, 1e-3, 0.05, 10), InvalidArgument);
    EXPECT_THROW(log_spaced_steps(0.5, 0.05, 1e-3, 0), InvalidArgument);
}

TEST(Schedule, ExperimentValidation)
{
    ExperimentSpec spec;
    spec.methods = {{Variant::Radau, 3, 1}};
    spec.n_steps = {10, 20};
    EXPECT_NO_THROW(validate(spec));
    spec.n_steps = {20, 10};
    EXPECT_THROW(validate(spec), InvalidArgument);
    spec.n_steps = {};
    EXPECT_THROW(validate(spec), InvalidArgument);
    spec.n_steps = {10};
    spec.methods.clear();
    EXPECT_THROW(validate(spec), InvalidArgument);
}

TEST(Errors, RelativeMaxNorm)
{
    Vector y(2), ref(2);
    ref << 2.0, -4.0;
    y << 2.0, -4.004;
    EXPECT_NEAR(relative_error(y, ref), 1e-3, 1e-15);
    EXPECT_THROW(relative_error(Vector::Zero(3), ref), InvalidArgument);
}

TEST(Convergence, RadauStarThreeOneOnVanDerPol)
{
    ExperimentSpec spec;
    spec.problem.kind = ProblemKind::VanDerPol;
    spec.problem.epsilon = 1.0;
    spec.methods = {{Variant::RadauStar, 3, 1}};
    spec.n_steps = {10, 14, 20, 28, 40};
    spec.repetitions = 1;
    const auto out = fs::temp_directory_path() / "fimex-test-converge";
    fs::remove_all(out);
    spec.out_dir = out;
    const auto reports = run_convergence(spec);
    ASSERT_EQ(reports.size(), 1u);
    ASSERT_TRUE(reports[0].fit);
    EXPECT_EQ(reports[0].expected_order, 3);
    EXPECT_GE(reports[0].fit->order, 2.6);
    EXPECT_LE(reports[0].fit->order, 3.4);
    EXPECT_FALSE(reports[0].any_failed());

    std::ifstream csv(out / (reports[0].method_id() + ".csv"));
    std::string header;
    std::getline(csv, header);
    EXPECT_EQ(header, "h,n_steps,error,wall_ms,status");
    std::string row;
    int rows = 0;
    while (std::getline(csv, row)) {
        ++rows;
        EXPECT_EQ(row.substr(row.rfind(',') + 1), "ok");
    }
    EXPECT_EQ(rows, 5);
    nlohmann::json manifest;
    std::ifstream(out / "manifest.json") >> manifest;
    EXPECT_EQ(manifest["spec"]["problem"]["kind"], "vdp");
    EXPECT_EQ(manifest["fits"].size(), 1u);
    fs::remove_all(out);
}

TEST(Convergence, ImplicitOnlyDahlquistIsThirdOrder)
{
    ExperimentSpec spec;
    spec.problem.kind = ProblemKind::Dahlquist;
    spec.problem.dahlquist = {{-1.0, 0.5}, 0.0, 1.0};
    spec.problem.t_end = 1.0;
    spec.methods = {{Variant::Radau, 3, 0}};
    spec.n_steps = {8, 16, 32, 64};
    spec.repetitions = 1;
    const auto reports = run_convergence(spec);
    ASSERT_TRUE(reports[0].fit);
    EXPECT_GE(reports[0].fit->order, 2.7);
    EXPECT_LE(reports[0].fit->order, 3.3);
}

TEST(Convergence, RowsBelowFloorAreFlagged)
{
    ProblemSpec p;
    p.kind = ProblemKind::Dahlquist;
    p.dahlquist = {-1.0, 0.0, 1.0};
    p.t_end = 1.0;
    Vector ref(1);
    ref << std::exp(-1.0);
    const auto row = timed_run(p, {Variant::Radau, 5, 0}, 64, ref, {}, 1, 1e-6);
    EXPECT_EQ(row.status, RunStatus::BelowFloor);
    EXPECT_EQ(to_string(row.status), "below-floor");
    ConvergenceReport report;
    report.rows = {row};
    EXPECT_FALSE(report.any_failed());
}

TEST(Convergence, NewtonFailureIsRecordedNotThrown)
{
    ProblemSpec p;
    p.kind = ProblemKind::VanDerPol;
    p.epsilon = 1e-6;
    SolverConfig cfg;
    cfg.newton_max_iters = 1;
    const auto row = timed_run(p, {Variant::Radau, 4, 1}, 2, initial_value(p), cfg, 1, 0.0);
    EXPECT_EQ(row.status, RunStatus::NewtonDivergence);
    EXPECT_FALSE(row.message.empty());
}

TEST(StabilityExport, WritesFilesAndManifest)
{
    StabilityExportSpec spec;
    spec.method = {Variant::RadauStar, 4, 1};
    spec.z1 = {0.0, {0.0, 3.0}};
    spec.theta = 3.0;
    spec.grid = {-6.0, 2.0, -4.0, 4.0, 41, 41};
    spec.out_dir = fs::temp_directory_path() / "fimex-test-stability";
    fs::remove_all(spec.out_dir);
    const auto entries = run_stability_export(spec);
    ASSERT_EQ(entries.size(), 3u);
    for (const auto& e : entries) {
        EXPECT_TRUE(fs::exists(e.scan_csv));
        EXPECT_TRUE(fs::exists(e.contour_csv));
        EXPECT_GT(e.stable_area, 0.0);
        EXPECT_TRUE(e.origin_stable) << e.tag;
    }
    nlohmann::json manifest;
    std::ifstream(spec.out_dir / "manifest.json") >> manifest;
    EXPECT_EQ(manifest["regions"].size(), 3u);
    EXPECT_EQ(manifest["tool"], "fimex");
    fs::remove_all(spec.out_dir);

    spec.grid.nx = 0;
    EXPECT_THROW(run_stability_export(spec), InvalidArgument);
}

TEST(Names, ProblemsAndMethods)
{
    EXPECT_EQ(parse_problem("vdp"), ProblemKind::VanDerPol);
    EXPECT_EQ(parse_problem("kdv"), ProblemKind::Kdv);
    EXPECT_THROW(parse_problem("lorenz"), InvalidArgument);
    ConvergenceReport r;
    r.method = {Variant::RadauStar, 4, 1};
    EXPECT_EQ(r.method_id(), "radau-star-q4-k1");
}
