// fimex: coefficient export, stability scans and convergence studies.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fimex/errors.hpp"
#include "fimex/harness.hpp"
#include "fimex/tableaux.hpp"

namespace {

using namespace fimex;

struct MethodOptions {
    std::vector<std::string> variants{"radau-star"};
    std::vector<int> qs{3};
    std::vector<int> kappas{0};

    void add(CLI::App* app)
    {
        app->add_option("--variant", variants, "radau or radau-star (repeatable)");
        app->add_option("--q", qs, "node count(s), 2..9")->check(CLI::Range(2, 9));
        app->add_option("--kappa", kappas, "iterator count(s)")->check(CLI::NonNegativeNumber);
    }

    std::vector<MethodSpec> methods() const
    {
        std::vector<MethodSpec> out;
        for (const auto& v : variants)
            for (int q : qs)
                for (int k : kappas) out.push_back({parse_variant(v), q, k});
        return out;
    }
};

Grid parse_grid(const std::string& text)
{
    Grid g;
    if (text.empty()) return g;
    std::vector<double> values;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) values.push_back(std::stod(item));
    if (values.size() == 1) {
        g.nx = g.ny = static_cast<int>(values[0]);
    } else if (values.size() == 6) {
        g.re_min = values[0];
        g.re_max = values[1];
        g.im_min = values[2];
        g.im_max = values[3];
        g.nx = static_cast<int>(values[4]);
        g.ny = static_cast<int>(values[5]);
    } else {
        throw InvalidArgument("--grid takes N or re_min,re_max,im_min,im_max,nx,ny");
    }
    return g;
}

Complex parse_complex(const std::string& text)
{
    const auto comma = text.find(',');
    if (comma == std::string::npos) return {std::stod(text), 0.0};
    return {std::stod(text.substr(0, comma)), std::stod(text.substr(comma + 1))};
}

// |z1| in {0, 3, 6}, arg(z1) in {0, 3 pi / 2, pi / 2}.
std::vector<Complex> default_z1_set()
{
    std::vector<Complex> out{0.0};
    for (double mag : {3.0, 6.0})
        for (Complex dir : {Complex(1.0, 0.0), Complex(0.0, -1.0), Complex(0.0, 1.0)}) out.push_back(mag * dir);
    return out;
}

std::vector<int> schedule(const std::vector<int>& steps, double t_end, double h_max, double h_min, int count)
{
    if (!steps.empty()) return steps;
    return log_spaced_steps(t_end, h_max, h_min, count);
}

void print_reports(const std::vector<ConvergenceReport>& reports)
{
    for (const auto& r : reports) {
        std::printf("%-18s expected %d", r.method_id().c_str(), r.expected_order);
        if (r.fit)
            std::printf("  fitted %.3f (residual %.3g, %d points)\n", r.fit->order, r.fit->residual, r.fit->points);
        else
            std::printf("  no fit\n");
    }
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"FIMEX time stepping: coefficients, stability regions and convergence studies"};
    app.require_subcommand(1);
    bool parallel = false;
    app.add_flag("--parallel", parallel, "use the thread pool (FIMEX_THREADS caps it)");

    // coeffs
    auto* coeffs = app.add_subcommand("coeffs", "export propagator and iterator coefficients");
    int coeff_q = 3;
    std::string coeff_variant = "radau-star", coeff_format = "csv", coeff_out;
    coeffs->add_option("--q", coeff_q, "node count")->check(CLI::Range(2, 9));
    coeffs->add_option("--variant", coeff_variant, "radau or radau-star");
    coeffs->add_option("--format", coeff_format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    coeffs->add_option("--out", coeff_out, "output file (stdout when omitted)");

    // stability
    auto* stability = app.add_subcommand("stability", "scan stability regions in the z2-plane");
    int stab_q = 4, stab_kappa = 0;
    std::string stab_variant = "radau-star", stab_grid, stab_out = "stability";
    std::vector<std::string> stab_z1;
    double theta = -1.0;
    stability->add_option("--q", stab_q)->check(CLI::Range(2, 9));
    stability->add_option("--kappa", stab_kappa)->check(CLI::NonNegativeNumber);
    stability->add_option("--variant", stab_variant);
    stability->add_option("--z1", stab_z1, "z1 as RE,IM (repeatable); default |z1| in {0,3,6} x arg in {0,3pi/2,pi/2}");
    stability->add_option("--theta", theta, "scan the wedge region for this angle instead");
    stability->add_option("--grid", stab_grid, "N or re_min,re_max,im_min,im_max,nx,ny (default 401 on [-8,8]^2)");
    stability->add_option("--out", stab_out, "output directory");

    // converge
    auto* converge = app.add_subcommand("converge", "convergence study with order fits");
    MethodOptions conv_methods;
    conv_methods.add(converge);
    std::string problem = "vdp", conv_splitting = "semi-implicit", conv_out;
    double eps = 1.0, conv_t_end = -1.0, h_max = 0.05, h_min = 1e-3, floor = 1e-12;
    int count = 8, reps = 3, kdv_n = 256;
    std::vector<int> steps;
    std::vector<double> lambda1{-1.0, 0.0}, lambda2{0.0, 0.0};
    converge->add_option("--problem", problem)->check(CLI::IsMember({"vdp", "dahlquist", "kdv"}));
    converge->add_option("--eps", eps)->check(CLI::PositiveNumber);
    converge->add_option("--splitting", conv_splitting, "semi-implicit or linearly-implicit");
    converge->add_option("--n", kdv_n, "KdV mode count");
    converge->add_option("--lambda1", lambda1, "RE IM")->expected(2);
    converge->add_option("--lambda2", lambda2, "RE IM")->expected(2);
    converge->add_option("--t-end", conv_t_end);
    converge->add_option("--steps", steps, "explicit step counts (increasing)")->delimiter(',');
    converge->add_option("--h-max", h_max);
    converge->add_option("--h-min", h_min);
    converge->add_option("--count", count, "number of log-spaced step sizes");
    converge->add_option("--floor", floor, "errors below this are excluded from the fit");
    converge->add_option("--repetitions", reps)->check(CLI::PositiveNumber);
    converge->add_option("--out", conv_out, "output directory");

    // kdv
    auto* kdv = app.add_subcommand("kdv", "KdV accuracy versus wall time");
    MethodOptions kdv_methods;
    kdv_methods.variants = {"radau-star"};
    kdv_methods.qs = {5};
    kdv_methods.kappas = {2};
    kdv_methods.add(kdv);
    int kdv_modes = 256, kdv_reps = 3, kdv_ref = 0;
    std::vector<int> kdv_steps{200, 400, 800, 1600};
    std::string kdv_out = "kdv";
    kdv->add_option("--n", kdv_modes, "Fourier modes (power of two)");
    kdv->add_option("--steps", kdv_steps)->delimiter(',');
    kdv->add_option("--reference-steps", kdv_ref, "0 means 64 x the finest step count");
    kdv->add_option("--repetitions", kdv_reps)->check(CLI::PositiveNumber);
    kdv->add_option("--out", kdv_out);

    // vdp
    auto* vdp = app.add_subcommand("vdp", "Van der Pol convergence rates over a range of eps");
    MethodOptions vdp_methods;
    vdp_methods.add(vdp);
    std::vector<double> vdp_eps{1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8};
    std::string vdp_splitting = "semi-implicit", vdp_out = "vdp";
    double vdp_h_max = 0.25, vdp_h_min = 1e-4, vdp_floor = 1e-12;
    int vdp_count = 30;
    std::vector<int> vdp_steps;
    vdp->add_option("--eps", vdp_eps, "eps values (repeatable)");
    vdp->add_option("--splitting", vdp_splitting);
    vdp->add_option("--steps", vdp_steps)->delimiter(',');
    vdp->add_option("--h-max", vdp_h_max);
    vdp->add_option("--h-min", vdp_h_min);
    vdp->add_option("--count", vdp_count);
    vdp->add_option("--floor", vdp_floor);
    vdp->add_option("--out", vdp_out);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*coeffs) {
            const auto t = build_propagator(coeff_q, parse_variant(coeff_variant));
            const auto text = export_coeffs(t, coeff_format == "json" ? CoeffFormat::Json : CoeffFormat::Csv);
            if (coeff_out.empty())
                std::cout << text;
            else
                write_text(coeff_out, text);
            return 0;
        }
        if (*stability) {
            StabilityExportSpec spec;
            spec.method = {parse_variant(stab_variant), stab_q, stab_kappa};
            spec.grid = parse_grid(stab_grid);
            spec.scan = {parallel, 0};
            spec.out_dir = stab_out;
            if (theta >= 0.0) spec.theta = theta;
            for (const auto& z : stab_z1) spec.z1.push_back(parse_complex(z));
            if (spec.z1.empty() && !spec.theta) spec.z1 = default_z1_set();
            for (const auto& e : run_stability_export(spec))
                std::printf("%-28s area %.6g  origin %s\n", e.tag.c_str(), e.stable_area,
                            e.origin_stable ? "stable" : "unstable");
            return 0;
        }
        if (*converge) {
            ExperimentSpec spec;
            spec.problem.kind = parse_problem(problem);
            spec.problem.epsilon = eps;
            spec.problem.splitting = parse_vdp_splitting(conv_splitting);
            spec.problem.kdv_n = kdv_n;
            spec.problem.dahlquist.lambda1 = {lambda1[0], lambda1[1]};
            spec.problem.dahlquist.lambda2 = {lambda2[0], lambda2[1]};
            spec.problem.t_end = conv_t_end > 0.0 ? conv_t_end
                                 : spec.problem.kind == ProblemKind::Kdv ? kKdvEndTime
                                 : spec.problem.kind == ProblemKind::VanDerPol ? kVdpEndTime
                                                                                : 1.0;
            spec.methods = conv_methods.methods();
            spec.n_steps = schedule(steps, spec.problem.t_end, h_max, h_min, count);
            spec.repetitions = reps;
            spec.error_floor = floor;
            spec.solver.parallel = parallel;
            spec.out_dir = conv_out;
            const auto reports = run_convergence(spec);
            print_reports(reports);
            for (const auto& r : reports)
                if (r.any_failed()) return 1;
            return 0;
        }
        if (*kdv) {
            KdvEfficiencySpec spec;
            spec.N = kdv_modes;
            spec.methods = kdv_methods.methods();
            spec.n_steps = kdv_steps;
            spec.parallel = parallel;
            spec.repetitions = kdv_reps;
            spec.reference_steps = kdv_ref;
            spec.out_dir = kdv_out;
            const auto rows = run_kdv_efficiency(spec);
            std::cout << efficiency_to_csv(rows);
            for (const auto& r : rows)
                if (r.status != RunStatus::Ok) return 1;
            return 0;
        }
        if (*vdp) {
            bool failed = false;
            for (double e : vdp_eps) {
                ExperimentSpec spec;
                spec.problem.kind = ProblemKind::VanDerPol;
                spec.problem.epsilon = e;
                spec.problem.splitting = parse_vdp_splitting(vdp_splitting);
                spec.problem.t_end = kVdpEndTime;
                spec.methods = vdp_methods.methods();
                spec.n_steps = schedule(vdp_steps, kVdpEndTime, vdp_h_max, vdp_h_min, vdp_count);
                spec.repetitions = 1;
                spec.error_floor = vdp_floor;
                spec.solver.parallel = parallel;
                char dir[64];
                std::snprintf(dir, sizeof dir, "eps_%g", e);
                spec.out_dir = std::filesystem::path(vdp_out) / dir;
                std::printf("eps = %g\n", e);
                const auto reports = run_convergence(spec);
                print_reports(reports);
                for (const auto& r : reports) failed = failed || r.any_failed();
            }
            return failed ? 1 : 0;
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "fimex: %s\n", e.what());
        return 1;
    }
    return 0;
}
