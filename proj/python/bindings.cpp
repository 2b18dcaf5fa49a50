#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fimex/errors.hpp"
#include "fimex/harness.hpp"
#include "fimex/integrator.hpp"
#include "fimex/nodes.hpp"
#include "fimex/problems.hpp"
#include "fimex/stability.hpp"
#include "fimex/tableaux.hpp"

namespace py = pybind11;
using namespace fimex;

namespace {

Eigen::MatrixXd field(const RegionScan& scan, const std::vector<double>& values)
{
    Eigen::MatrixXd out(scan.grid.ny, scan.grid.nx);
    for (int j = 0; j < scan.grid.ny; ++j)
        for (int i = 0; i < scan.grid.nx; ++i) out(j, i) = values[static_cast<std::size_t>(j) * scan.grid.nx + i];
    return out;
}

Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> mask(const RegionScan& scan)
{
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> out(scan.grid.ny, scan.grid.nx);
    for (int j = 0; j < scan.grid.ny; ++j)
        for (int i = 0; i < scan.grid.nx; ++i) out(j, i) = scan.stable(i, j);
    return out;
}

MethodSpec method_from(const std::string& variant, int q, int kappa)
{
    return {parse_variant(variant), q, kappa};
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Fully implicit/explicit polynomial block methods";

    auto base = py::register_exception<Error>(m, "FimexError");
    py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
    py::register_exception<UnsupportedOrder>(m, "UnsupportedOrder", base.ptr());
    py::register_exception<DegenerateInterpolation>(m, "DegenerateInterpolation", base.ptr());
    py::register_exception<NewtonDivergence>(m, "NewtonDivergence", base.ptr());
    py::register_exception<LinearSolveFailure>(m, "LinearSolveFailure", base.ptr());
    py::register_exception<PoleError>(m, "PoleError", base.ptr());
    py::register_exception<EigenSolverFailure>(m, "EigenSolverFailure", base.ptr());

    m.def("radau_nodes", [](int q) { return radau_nodes(q).z; }, py::arg("q"));
    m.def(
        "quad_weights",
        [](const std::vector<double>& nodes, double a, const std::vector<double>& b) -> Eigen::MatrixXd {
            return quad_weights(nodes, a, b);
        },
        py::arg("interp_nodes"), py::arg("a"), py::arg("b"));

    py::class_<MethodTableau>(m, "MethodTableau")
        .def_readonly("q", &MethodTableau::q)
        .def_property_readonly("variant", [](const MethodTableau& t) { return std::string(to_string(t.variant)); })
        .def_property_readonly("nodes", [](const MethodTableau& t) { return t.nodes.z; })
        .def_property_readonly("A", [](const MethodTableau& t) -> Eigen::MatrixXd { return t.A; })
        .def_property_readonly("B1", [](const MethodTableau& t) -> Eigen::MatrixXd { return t.B1; })
        .def_property_readonly("B2", [](const MethodTableau& t) -> Eigen::MatrixXd { return t.B2; })
        .def_property_readonly("A_tilde", [](const MethodTableau& t) -> Eigen::MatrixXd { return t.A_tilde; })
        .def_property_readonly("B_it", [](const MethodTableau& t) -> Eigen::MatrixXd { return t.B_it; })
        .def("to_json", [](const MethodTableau& t) { return export_coeffs(t, CoeffFormat::Json); })
        .def("to_csv", [](const MethodTableau& t) { return export_coeffs(t, CoeffFormat::Csv); });

    m.def(
        "build_propagator", [](int q, const std::string& variant) { return build_propagator(q, parse_variant(variant)); },
        py::arg("q"), py::arg("variant") = "radau-star");
    m.def(
        "expected_order",
        [](const std::string& variant, int q, int kappa) { return expected_order(parse_variant(variant), q, kappa); },
        py::arg("variant"), py::arg("q"), py::arg("kappa"));

    m.def(
        "amplification",
        [](const MethodTableau& t, Complex z1, Complex z2, int kappa) { return amplification(t, {z1, z2, kappa}); },
        py::arg("tableau"), py::arg("z1"), py::arg("z2"), py::arg("kappa") = 0);
    m.def("spectral_radius", &spectral_radius, py::arg("matrix"));
    m.def("amplification_radius", &amplification_radius, py::arg("tableau"), py::arg("z1"), py::arg("z2"),
          py::arg("kappa") = 0);

    py::class_<Grid>(m, "Grid")
        .def(py::init([](double re_min, double re_max, double im_min, double im_max, int nx, int ny) {
                 return Grid{re_min, re_max, im_min, im_max, nx, ny};
             }),
             py::arg("re_min") = -8.0, py::arg("re_max") = 8.0, py::arg("im_min") = -8.0, py::arg("im_max") = 8.0,
             py::arg("nx") = 401, py::arg("ny") = 401)
        .def_readwrite("re_min", &Grid::re_min)
        .def_readwrite("re_max", &Grid::re_max)
        .def_readwrite("im_min", &Grid::im_min)
        .def_readwrite("im_max", &Grid::im_max)
        .def_readwrite("nx", &Grid::nx)
        .def_readwrite("ny", &Grid::ny);

    py::class_<RegionScan>(m, "RegionScan")
        .def_readonly("grid", &RegionScan::grid)
        .def_property_readonly("rho", [](const RegionScan& s) { return field(s, s.rho); })
        .def_property_readonly("mask", &mask)
        .def_readonly("contour", &RegionScan::contour)
        .def_property_readonly("stable_area", &RegionScan::stable_area);

    m.def(
        "region_S",
        [](Complex z1, const MethodTableau& t, int kappa, const Grid& g, bool parallel) {
            py::gil_scoped_release release;
            return region_S(z1, t, kappa, g, {parallel, 0});
        },
        py::arg("z1"), py::arg("tableau"), py::arg("kappa"), py::arg("grid") = Grid{}, py::arg("parallel") = false);
    m.def(
        "region_S_hat",
        [](Complex z1, const MethodTableau& t, int kappa, const Grid& g, bool parallel) {
            py::gil_scoped_release release;
            return region_S_hat(z1, t, kappa, g, {parallel, 0});
        },
        py::arg("z1"), py::arg("tableau"), py::arg("kappa"), py::arg("grid") = Grid{}, py::arg("parallel") = false);
    m.def(
        "region_S_tilde",
        [](double theta, const MethodTableau& t, int kappa, const Grid& g, bool parallel) {
            py::gil_scoped_release release;
            return region_S_tilde(theta, t, kappa, g, default_wedge_sampling(), {parallel, 0});
        },
        py::arg("theta"), py::arg("tableau"), py::arg("kappa"), py::arg("grid") = Grid{}, py::arg("parallel") = false);

    m.def(
        "integrate",
        [](RhsFunction f1, RhsFunction f2, const Vector& y0, double t0, double t_end, int n_steps,
           const std::string& variant, int q, int kappa, std::optional<JacobianFunction> jacobian_f1) {
            PartitionedProblem p;
            p.dim = y0.size();
            p.f1 = std::move(f1);
            p.f2 = std::move(f2);
            if (jacobian_f1) p.jacobian_f1 = std::move(*jacobian_f1);
            return integrate(p, y0, method_from(variant, q, kappa), t0, t_end, n_steps).y_end;
        },
        py::arg("f1"), py::arg("f2"), py::arg("y0"), py::arg("t0"), py::arg("t_end"), py::arg("n_steps"),
        py::arg("variant") = "radau-star", py::arg("q") = 3, py::arg("kappa") = 0, py::arg("jacobian_f1") = py::none(),
        "Integrates y' = f1(t, y) + f2(t, y) with f1 implicit and f2 explicit; returns y(t_end).");

    m.def(
        "integrate_dahlquist",
        [](Complex lambda1, Complex lambda2, Complex y0, double t_end, int n_steps, const std::string& variant, int q,
           int kappa) {
            py::gil_scoped_release release;
            const DahlquistProblem d{lambda1, lambda2, y0};
            return integrate(d.partitioned(), Vector::Constant(1, y0), method_from(variant, q, kappa), 0.0, t_end,
                             n_steps)
                .y_end[0];
        },
        py::arg("lambda1"), py::arg("lambda2"), py::arg("y0") = Complex(1.0), py::arg("t_end") = 1.0,
        py::arg("n_steps") = 10, py::arg("variant") = "radau-star", py::arg("q") = 3, py::arg("kappa") = 0);

    m.def(
        "integrate_vdp",
        [](double eps, const std::string& splitting, double t_end, int n_steps, const std::string& variant, int q,
           int kappa) {
            py::gil_scoped_release release;
            const VanDerPolProblem vdp{eps};
            const Vector y = integrate(vdp_rhs_components(parse_vdp_splitting(splitting), eps), vdp.initial_value(),
                                       method_from(variant, q, kappa), 0.0, t_end, n_steps)
                                 .y_end;
            return Eigen::VectorXd(y.real());
        },
        py::arg("eps"), py::arg("splitting") = "semi-implicit", py::arg("t_end") = kVdpEndTime,
        py::arg("n_steps") = 50, py::arg("variant") = "radau-star", py::arg("q") = 4, py::arg("kappa") = 1);

    m.def(
        "integrate_kdv",
        [](int N, double t_end, int n_steps, const std::string& variant, int q, int kappa) {
            py::gil_scoped_release release;
            const KdvSpectralProblem kdv{N, 0.022};
            const Vector uhat = integrate(kdv.partitioned(), kdv.initial_state(), method_from(variant, q, kappa), 0.0,
                                          t_end, n_steps)
                                    .y_end;
            return Eigen::VectorXd(kdv.to_physical(uhat).real());
        },
        py::arg("N") = 256, py::arg("t_end") = kKdvEndTime, py::arg("n_steps") = 200, py::arg("variant") = "radau-star",
        py::arg("q") = 5, py::arg("kappa") = 2, "Physical KdV solution u(x_j, t_end) on x_j = 2 j / N.");

    m.def(
        "fit_order",
        [](const std::vector<double>& h, const std::vector<double>& err) {
            if (h.size() != err.size()) throw InvalidArgument("fit_order: h and error lengths differ");
            std::vector<std::pair<double, double>> pairs;
            for (std::size_t k = 0; k < h.size(); ++k) pairs.emplace_back(h[k], err[k]);
            const auto fit = fit_order(pairs);
            return py::dict(py::arg("order") = fit.order, py::arg("intercept") = fit.intercept,
                            py::arg("residual") = fit.residual, py::arg("points") = fit.points);
        },
        py::arg("h"), py::arg("error"));
    m.def("log_spaced_steps", &log_spaced_steps, py::arg("t_span"), py::arg("h_max"), py::arg("h_min"),
          py::arg("count"));

    m.attr("__version__") = FIMEX_VERSION;
}
