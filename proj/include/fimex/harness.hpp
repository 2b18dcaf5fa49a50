#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "fimex/integrator.hpp"
#include "fimex/problems.hpp"
#include "fimex/stability.hpp"

namespace fimex {

struct OrderFit {
    double order = 0.0;      // slope of ln(error) against ln(h)
    double intercept = 0.0;
    double residual = 0.0;   // RMS of the log-space residuals
    int points = 0;
};

/// Ordinary least squares on (ln h, ln e). Pairs with non-positive or
/// non-finite entries are skipped; throws InvalidArgument when fewer than two
/// remain or all h coincide.
OrderFit fit_order(std::span<const std::pair<double, double>> pairs);

enum class RunStatus { Ok, NewtonDivergence, LinearSolveFailure, Overflow, BelowFloor };

std::string_view to_string(RunStatus s);

struct ConvergenceRow {
    double h = 0.0;
    int n_steps = 0;
    double error = 0.0;
    double wall_ms = 0.0;
    RunStatus status = RunStatus::Ok;
    std::string message;
};

struct ConvergenceReport {
    MethodSpec method;
    int expected_order = 0;
    std::vector<ConvergenceRow> rows;
    std::optional<OrderFit> fit;  // over rows with status Ok only

    std::string method_id() const;
    /// Columns h,n_steps,error,wall_ms,status.
    std::string to_csv() const;
    bool any_failed() const;
};

enum class ProblemKind { Dahlquist, VanDerPol, Kdv };

std::string_view to_string(ProblemKind k);
ProblemKind parse_problem(std::string_view s);

struct ProblemSpec {
    ProblemKind kind = ProblemKind::VanDerPol;
    DahlquistProblem dahlquist;
    double epsilon = 1.0;
    VdpSplitting splitting = VdpSplitting::SemiImplicit;
    int kdv_n = 512;
    double t_end = kVdpEndTime;

    nlohmann::json to_json() const;
};

struct ExperimentSpec {
    ProblemSpec problem;
    std::vector<MethodSpec> methods;
    /// Strictly increasing step counts (strictly decreasing h).
    std::vector<int> n_steps;
    int repetitions = 3;
    /// Rows whose error falls below this are reported as BelowFloor and left
    /// out of the fit.
    double error_floor = 0.0;
    /// Reference step count = reference_factor * max(n_steps).
    int reference_factor = 64;
    SolverConfig solver;
    /// When non-empty, one CSV per method plus manifest.json are written here.
    std::filesystem::path out_dir;

    nlohmann::json to_json() const;
};

void validate(const ExperimentSpec& spec);

/// Step counts with h = t_span / n approximately log-spaced in [h_min, h_max];
/// duplicates after rounding are dropped.
std::vector<int> log_spaced_steps(double t_span, double h_max, double h_min, int count);

/// Relative infinity-norm error.
double relative_error(const Vector& y, const Vector& ref);

/// Reference solution for the problem at its t_end (closed form or cached).
Vector reference_solution(const ProblemSpec& problem, int n_steps);

PartitionedProblem build_problem(const ProblemSpec& problem);
Vector initial_value(const ProblemSpec& problem);

/// One timed run: min wall time over `repetitions`, status from the outcome.
ConvergenceRow timed_run(const ProblemSpec& problem, const MethodSpec& method, int n_steps, const Vector& reference,
                         const SolverConfig& solver, int repetitions, double error_floor);

std::vector<ConvergenceReport> run_convergence(const ExperimentSpec& spec);

struct StabilityExportSpec {
    MethodSpec method{Variant::RadauStar, 4, 0};
    std::vector<Complex> z1;
    std::optional<double> theta;  // S-tilde scan instead of S-hat(z1)
    Grid grid;
    ScanOptions scan;
    std::filesystem::path out_dir;

    nlohmann::json to_json() const;
};

struct StabilityExportEntry {
    std::string tag;
    double stable_area = 0.0;
    bool origin_stable = false;
    std::filesystem::path scan_csv;
    std::filesystem::path contour_csv;
};

/// Writes scan_<tag>.csv and contour_<tag>.csv per z1 (or the single
/// S-tilde scan) into out_dir.
std::vector<StabilityExportEntry> run_stability_export(const StabilityExportSpec& spec);

struct KdvEfficiencySpec {
    int N = 256;
    double t_end = kKdvEndTime;
    std::vector<MethodSpec> methods;
    std::vector<int> n_steps;
    bool parallel = false;
    int threads = 0;
    int repetitions = 3;
    int reference_steps = 0;  // 0: 64 * max(n_steps)
    std::filesystem::path out_dir;

    nlohmann::json to_json() const;
};

struct EfficiencyRow {
    MethodSpec method;
    int n_steps = 0;
    double error = 0.0;
    double wall_ms_serial = 0.0;
    std::optional<double> error_parallel;
    std::optional<double> wall_ms_parallel;
    RunStatus status = RunStatus::Ok;
};

/// Columns method,n_steps,error,wall_ms_serial,wall_ms_parallel.
std::string efficiency_to_csv(const std::vector<EfficiencyRow>& rows);

std::vector<EfficiencyRow> run_kdv_efficiency(const KdvEfficiencySpec& spec);

/// {"tool": "fimex", "version": ..., "spec": spec}
nlohmann::json run_manifest(const nlohmann::json& spec);

void write_text(const std::filesystem::path& path, const std::string& text);

/// %.17g
std::string format_double(double v);

nlohmann::json to_json(const MethodSpec& m);

}  // namespace fimex
