#include "fimex/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include "fimex/errors.hpp"

namespace fimex {

OrderFit fit_order(std::span<const std::pair<double, double>> pairs)
{
    std::vector<double> xs, ys;
    for (const auto& [h, e] : pairs) {
        if (!(h > 0.0) || !(e > 0.0) || !std::isfinite(h) || !std::isfinite(e)) continue;
        xs.push_back(std::log(h));
        ys.push_back(std::log(e));
    }
    if (xs.size() < 2) throw InvalidArgument("fit_order: need at least two valid (h, error) pairs");
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (!(sxx > 0.0)) throw InvalidArgument("fit_order: step sizes are all equal");
    OrderFit fit;
    fit.order = sxy / sxx;
    fit.intercept = my - fit.order * mx;
    double ss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - (fit.intercept + fit.order * xs[i]);
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / n);
    fit.points = static_cast<int>(xs.size());
    return fit;
}

std::string_view to_string(RunStatus s)
{
    switch (s) {
    case RunStatus::Ok: return "ok";
    case RunStatus::NewtonDivergence: return "newton-divergence";
    case RunStatus::LinearSolveFailure: return "linear-solve-failure";
    case RunStatus::Overflow: return "overflow";
    case RunStatus::BelowFloor: return "below-floor";
    }
    return "unknown";
}

std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

nlohmann::json to_json(const MethodSpec& m)
{
    return {{"variant", std::string(to_string(m.variant))}, {"q", m.q}, {"kappa", m.kappa}};
}

std::string ConvergenceReport::method_id() const
{
    return std::string(to_string(method.variant)) + "-q" + std::to_string(method.q) + "-k" +
           std::to_string(method.kappa);
}

std::string ConvergenceReport::to_csv() const
{
    std::string out = "h,n_steps,error,wall_ms,status\n";
    for (const auto& row : rows) {
        out += format_double(row.h) + ',' + std::to_string(row.n_steps) + ',' + format_double(row.error) + ',' +
               format_double(row.wall_ms) + ',' + std::string(to_string(row.status)) + '\n';
    }
    return out;
}

bool ConvergenceReport::any_failed() const
{
    return std::any_of(rows.begin(), rows.end(), [](const ConvergenceRow& r) {
        return r.status != RunStatus::Ok && r.status != RunStatus::BelowFloor;
    });
}

std::string_view to_string(ProblemKind k)
{
    switch (k) {
    case ProblemKind::Dahlquist: return "dahlquist";
    case ProblemKind::VanDerPol: return "vdp";
    case ProblemKind::Kdv: return "kdv";
    }
    return "unknown";
}

ProblemKind parse_problem(std::string_view s)
{
    if (s == "dahlquist") return ProblemKind::Dahlquist;
    if (s == "vdp" || s == "van-der-pol") return ProblemKind::VanDerPol;
    if (s == "kdv") return ProblemKind::Kdv;
    throw InvalidArgument("unknown problem '" + std::string(s) + "'");
}

nlohmann::json ProblemSpec::to_json() const
{
    nlohmann::json j = {{"kind", std::string(to_string(kind))}, {"t_end", t_end}};
    switch (kind) {
    case ProblemKind::Dahlquist:
        j["lambda1"] = {dahlquist.lambda1.real(), dahlquist.lambda1.imag()};
        j["lambda2"] = {dahlquist.lambda2.real(), dahlquist.lambda2.imag()};
        j["y0"] = {dahlquist.y0.real(), dahlquist.y0.imag()};
        break;
    case ProblemKind::VanDerPol:
        j["epsilon"] = epsilon;
        j["splitting"] = std::string(to_string(splitting));
        break;
    case ProblemKind::Kdv: j["N"] = kdv_n; break;
    }
    return j;
}

nlohmann::json ExperimentSpec::to_json() const
{
    nlohmann::json methods_json = nlohmann::json::array();
    for (const auto& m : methods) methods_json.push_back(fimex::to_json(m));
    return {{"problem", problem.to_json()},
            {"methods", methods_json},
            {"n_steps", n_steps},
            {"repetitions", repetitions},
            {"error_floor", error_floor},
            {"reference_factor", reference_factor},
            {"solver",
             {{"newton_tol", solver.newton_tol},
              {"newton_max_iters", solver.newton_max_iters},
              {"newton_mode", solver.newton_mode == NewtonMode::Full ? "full" : "simplified"},
              {"parallel", solver.parallel}}}};
}

void validate(const ExperimentSpec& spec)
{
    if (spec.methods.empty()) throw InvalidArgument("experiment has no methods");
    if (spec.n_steps.empty()) throw InvalidArgument("experiment has an empty step schedule");
    for (std::size_t i = 0; i < spec.n_steps.size(); ++i) {
        if (spec.n_steps[i] < 1) throw InvalidArgument("step counts must be positive");
        if (i > 0 && spec.n_steps[i] <= spec.n_steps[i - 1])
            throw InvalidArgument("step schedule must be strictly decreasing in h");
    }
    if (spec.repetitions < 1) throw InvalidArgument("repetitions must be at least 1");
    if (spec.reference_factor < 1) throw InvalidArgument("reference factor must be at least 1");
    if (!(spec.problem.t_end > 0.0)) throw InvalidArgument("t_end must be positive");
}

std::vector<int> log_spaced_steps(double t_span, double h_max, double h_min, int count)
{
    if (!(t_span > 0.0) || !(h_min > 0.0) || !(h_max >= h_min) || count < 1)
        throw InvalidArgument("log_spaced_steps: invalid range");
    std::set<int> steps;
    for (int i = 0; i < count; ++i) {
        const double frac = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
        const double h = h_max * std::pow(h_min / h_max, frac);
        steps.insert(std::max(1, static_cast<int>(std::lround(t_span / h))));
    }
    return {steps.begin(), steps.end()};
}

double relative_error(const Vector& y, const Vector& ref)
{
    if (y.size() != ref.size()) throw InvalidArgument("relative_error: size mismatch");
    const double scale = ref.cwiseAbs().maxCoeff();
    const double diff = (y - ref).cwiseAbs().maxCoeff();
    return scale > 0.0 ? diff / scale : diff;
}

PartitionedProblem build_problem(const ProblemSpec& problem)
{
    switch (problem.kind) {
    case ProblemKind::Dahlquist: return problem.dahlquist.partitioned();
    case ProblemKind::VanDerPol: return vdp_rhs_components(problem.splitting, problem.epsilon);
    case ProblemKind::Kdv: return kdv_problem(problem.kdv_n);
    }
    throw InvalidArgument("unknown problem");
}

Vector initial_value(const ProblemSpec& problem)
{
    switch (problem.kind) {
    case ProblemKind::Dahlquist: return Vector::Constant(1, problem.dahlquist.y0);
    case ProblemKind::VanDerPol: return VanDerPolProblem{problem.epsilon}.initial_value();
    case ProblemKind::Kdv: return KdvSpectralProblem{problem.kdv_n}.initial_state();
    }
    throw InvalidArgument("unknown problem");
}

Vector reference_solution(const ProblemSpec& problem, int n_steps)
{
    switch (problem.kind) {
    case ProblemKind::Dahlquist: return Vector::Constant(1, problem.dahlquist.exact(problem.t_end));
    case ProblemKind::VanDerPol: return vdp_reference(problem.epsilon, problem.splitting, n_steps, problem.t_end);
    case ProblemKind::Kdv: return kdv_reference(problem.kdv_n, n_steps, problem.t_end);
    }
    throw InvalidArgument("unknown problem");
}

ConvergenceRow timed_run(const ProblemSpec& problem, const MethodSpec& method, int n_steps, const Vector& reference,
                         const SolverConfig& solver, int repetitions, double error_floor)
{
    ConvergenceRow row;
    row.n_steps = n_steps;
    row.h = problem.t_end / n_steps;
    row.wall_ms = std::numeric_limits<double>::infinity();
    const Vector y0 = initial_value(problem);
    try {
        for (int rep = 0; rep < repetitions; ++rep) {
            // A fresh problem per repetition: linearly implicit splittings carry state.
            const PartitionedProblem p = build_problem(problem);
            const auto start = std::chrono::steady_clock::now();
            const auto result = integrate(p, y0, method, 0.0, problem.t_end, n_steps, solver);
            const auto stop = std::chrono::steady_clock::now();
            row.wall_ms = std::min(row.wall_ms, std::chrono::duration<double, std::milli>(stop - start).count());
            row.error = relative_error(result.y_end, reference);
        }
        if (!std::isfinite(row.error))
            row.status = RunStatus::Overflow;
        else if (row.error < error_floor)
            row.status = RunStatus::BelowFloor;
    } catch (const NewtonDivergence& e) {
        row.status = RunStatus::NewtonDivergence;
        row.message = e.what();
    } catch (const LinearSolveFailure& e) {
        row.status = RunStatus::LinearSolveFailure;
        row.message = e.what();
    }
    if (row.status != RunStatus::Ok && row.status != RunStatus::BelowFloor) {
        row.error = std::numeric_limits<double>::quiet_NaN();
        if (!std::isfinite(row.wall_ms)) row.wall_ms = std::numeric_limits<double>::quiet_NaN();
    }
    return row;
}

std::vector<ConvergenceReport> run_convergence(const ExperimentSpec& spec)
{
    validate(spec);
    const Vector reference = reference_solution(spec.problem, spec.reference_factor * spec.n_steps.back());
    std::vector<ConvergenceReport> reports;
    for (const auto& method : spec.methods) {
        ConvergenceReport report;
        report.method = method;
        report.expected_order = expected_order(method.variant, method.q, method.kappa);
        std::vector<std::pair<double, double>> pairs;
        for (int n : spec.n_steps) {
            auto row = timed_run(spec.problem, method, n, reference, spec.solver, spec.repetitions, spec.error_floor);
            if (row.status == RunStatus::Ok) pairs.emplace_back(row.h, row.error);
            report.rows.push_back(std::move(row));
        }
        if (pairs.size() >= 2) report.fit = fit_order(pairs);
        reports.push_back(std::move(report));
    }
    if (!spec.out_dir.empty()) {
        std::filesystem::create_directories(spec.out_dir);
        nlohmann::json fits = nlohmann::json::array();
        for (const auto& r : reports) {
            write_text(spec.out_dir / (r.method_id() + ".csv"), r.to_csv());
            nlohmann::json f = {{"method", r.method_id()}, {"expected_order", r.expected_order}};
            if (r.fit) f["fit"] = {{"order", r.fit->order}, {"residual", r.fit->residual}, {"points", r.fit->points}};
            fits.push_back(f);
        }
        auto manifest = run_manifest(spec.to_json());
        manifest["fits"] = fits;
        write_text(spec.out_dir / "manifest.json", manifest.dump(2) + "\n");
    }
    return reports;
}

nlohmann::json StabilityExportSpec::to_json() const
{
    nlohmann::json z1s = nlohmann::json::array();
    for (const auto& z : z1) z1s.push_back({z.real(), z.imag()});
    nlohmann::json j = {{"method", fimex::to_json(method)},
                        {"z1", z1s},
                        {"grid",
                         {{"re", {grid.re_min, grid.re_max}},
                          {"im", {grid.im_min, grid.im_max}},
                          {"nx", grid.nx},
                          {"ny", grid.ny}}}};
    if (theta) j["theta"] = *theta;
    return j;
}

namespace {

std::string z1_tag(Complex z)
{
    char buf[96];
    std::snprintf(buf, sizeof buf, "z1_%.6g_%.6g", z.real(), z.imag());
    return buf;
}

bool origin_in_tilde(const MethodTableau& t, int kappa, double theta)
{
    const auto sampling = default_wedge_sampling();
    for (double gamma : sampling.gammas)
        for (int k = 0; k < sampling.rays; ++k) {
            const double omega = theta + (std::numbers::pi - theta) * k / std::max(1, sampling.rays - 1);
            const Complex z1 = std::polar(gamma, omega);
            if (std::max(amplification_radius(t, z1, 0.0, kappa), amplification_radius(t, std::conj(z1), 0.0, kappa)) >
                1.0 + kStabilitySlack)
                return false;
        }
    return true;
}

}  // namespace

std::vector<StabilityExportEntry> run_stability_export(const StabilityExportSpec& spec)
{
    validate(spec.grid);
    if (!spec.theta && spec.z1.empty()) throw InvalidArgument("stability export needs z1 values or theta");
    const MethodTableau t = build_propagator(spec.method.q, spec.method.variant);
    std::filesystem::create_directories(spec.out_dir);

    std::vector<StabilityExportEntry> entries;
    auto emit = [&](const std::string& tag, const RegionScan& scan, bool origin) {
        StabilityExportEntry e;
        e.tag = tag;
        e.stable_area = scan.stable_area();
        e.origin_stable = origin;
        e.scan_csv = spec.out_dir / ("scan_" + tag + ".csv");
        e.contour_csv = spec.out_dir / ("contour_" + tag + ".csv");
        write_text(e.scan_csv, scan_to_csv(scan));
        write_text(e.contour_csv, contour_to_csv(scan));
        entries.push_back(std::move(e));
    };
    const int kappa = spec.method.kappa;
    if (spec.theta) {
        const auto scan = region_S_tilde(*spec.theta, t, kappa, spec.grid, default_wedge_sampling(), spec.scan);
        char buf[48];
        std::snprintf(buf, sizeof buf, "theta_%.6g", *spec.theta);
        emit(buf, scan, origin_in_tilde(t, kappa, *spec.theta));
    }
    for (const auto& z1 : spec.z1) {
        const auto scan = region_S_hat(z1, t, kappa, spec.grid, spec.scan);
        const bool origin = std::max(amplification_radius(t, z1, 0.0, kappa),
                                     amplification_radius(t, std::conj(z1), 0.0, kappa)) <= 1.0 + kStabilitySlack;
        emit(z1_tag(z1), scan, origin);
    }
    nlohmann::json areas = nlohmann::json::array();
    for (const auto& e : entries)
        areas.push_back({{"tag", e.tag}, {"stable_area", e.stable_area}, {"origin_stable", e.origin_stable}});
    auto manifest = run_manifest(spec.to_json());
    manifest["regions"] = areas;
    write_text(spec.out_dir / "manifest.json", manifest.dump(2) + "\n");
    return entries;
}

nlohmann::json KdvEfficiencySpec::to_json() const
{
    nlohmann::json methods_json = nlohmann::json::array();
    for (const auto& m : methods) methods_json.push_back(fimex::to_json(m));
    return {{"N", N},          {"t_end", t_end},           {"methods", methods_json},
            {"n_steps", n_steps}, {"parallel", parallel}, {"threads", threads},
            {"repetitions", repetitions}, {"reference_steps", reference_steps}};
}

std::string efficiency_to_csv(const std::vector<EfficiencyRow>& rows)
{
    std::string out = "method,n_steps,error,wall_ms_serial,wall_ms_parallel\n";
    for (const auto& r : rows) {
        ConvergenceReport id;
        id.method = r.method;
        out += id.method_id() + ',' + std::to_string(r.n_steps) + ',' +
               (r.status == RunStatus::Ok ? format_double(r.error) : std::string(to_string(r.status))) + ',' +
               format_double(r.wall_ms_serial) + ',' + (r.wall_ms_parallel ? format_double(*r.wall_ms_parallel) : "") +
               '\n';
    }
    return out;
}

std::vector<EfficiencyRow> run_kdv_efficiency(const KdvEfficiencySpec& spec)
{
    if (spec.methods.empty() || spec.n_steps.empty()) throw InvalidArgument("kdv efficiency: empty study");
    ProblemSpec problem;
    problem.kind = ProblemKind::Kdv;
    problem.kdv_n = spec.N;
    problem.t_end = spec.t_end;
    const int max_steps = *std::max_element(spec.n_steps.begin(), spec.n_steps.end());
    const Vector reference = reference_solution(problem, spec.reference_steps > 0 ? spec.reference_steps : 64 * max_steps);

    std::vector<EfficiencyRow> rows;
    for (const auto& method : spec.methods) {
        for (int n : spec.n_steps) {
            EfficiencyRow row;
            row.method = method;
            row.n_steps = n;
            const auto serial = timed_run(problem, method, n, reference, SolverConfig{}, spec.repetitions, 0.0);
            row.error = serial.error;
            row.wall_ms_serial = serial.wall_ms;
            row.status = serial.status;
            if (spec.parallel && serial.status == RunStatus::Ok) {
                SolverConfig cfg;
                cfg.parallel = true;
                cfg.threads = spec.threads;
                const auto par = timed_run(problem, method, n, reference, cfg, spec.repetitions, 0.0);
                row.error_parallel = par.error;
                row.wall_ms_parallel = par.wall_ms;
            }
            rows.push_back(row);
        }
    }
    if (!spec.out_dir.empty()) {
        std::filesystem::create_directories(spec.out_dir);
        write_text(spec.out_dir / "kdv_efficiency.csv", efficiency_to_csv(rows));
        write_text(spec.out_dir / "manifest.json", run_manifest(spec.to_json()).dump(2) + "\n");
    }
    return rows;
}

nlohmann::json run_manifest(const nlohmann::json& spec)
{
    return {{"tool", "fimex"}, {"version", FIMEX_VERSION}, {"spec", spec}};
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw Error("failed writing " + path.string());
}

}  // namespace fimex
