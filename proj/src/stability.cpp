#include "fimex/stability.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <memory>
#include <numbers>
#include <sstream>
#include <unordered_map>

#include "fimex/errors.hpp"
#include "fimex/parallel.hpp"

namespace fimex {

namespace {

Matrix resolvent(const RealMatrix& b, Complex w)
{
    const auto q = b.rows();
    const Matrix system = Matrix::Identity(q, q) - w * b.cast<Complex>();
    const Eigen::PartialPivLU<Matrix> lu(system);
    const double pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
    if (!(pivot > 0.0) || !(lu.rcond() > std::numeric_limits<double>::epsilon()))
        throw PoleError("resolvent (I - w B) is singular");
    return lu.inverse();
}

// Everything in M that depends only on z1; the z2 dependence is affine.
class AmplificationFamily {
public:
    AmplificationFamily(const MethodTableau& t, Complex z1)
    {
        const Complex w1 = 0.5 * z1;
        const Matrix prop = resolvent(t.B1, w1);
        const Matrix iter = resolvent(t.B_it, w1);
        prop_base_ = prop * t.A.cast<Complex>();
        prop_slope_ = prop * t.B2.cast<Complex>();
        iter_base_ = iter * t.A_tilde.cast<Complex>();
        iter_slope_ = iter * t.B_it.cast<Complex>();
    }

    Matrix operator()(Complex z2, int kappa) const
    {
        const Complex w2 = 0.5 * z2;
        Matrix m = prop_base_ + w2 * prop_slope_;
        if (kappa > 0) {
            const Matrix it = iter_base_ + w2 * iter_slope_;
            for (int k = 0; k < kappa; ++k) m = it * m;
        }
        return m;
    }

private:
    Matrix prop_base_, prop_slope_, iter_base_, iter_slope_;
};

double radius_or_inf(const AmplificationFamily* family, Complex z2, int kappa)
{
    if (family == nullptr) return std::numeric_limits<double>::infinity();
    return spectral_radius((*family)(z2, kappa));
}

std::unique_ptr<AmplificationFamily> make_family(const MethodTableau& t, Complex z1)
{
    try {
        return std::make_unique<AmplificationFamily>(t, z1);
    } catch (const PoleError&) {
        return nullptr;
    }
}

// Fills rho(i, j) = max over families of the spectral radius.
RegionScan scan(const std::vector<const AmplificationFamily*>& families, int kappa, const Grid& grid,
                const ScanOptions& opts)
{
    validate(grid);
    RegionScan out;
    out.grid = grid;
    const auto total = static_cast<std::size_t>(grid.nx) * static_cast<std::size_t>(grid.ny);
    out.rho.assign(total, 0.0);

    auto row = [&](std::size_t j) {
        for (int i = 0; i < grid.nx; ++i) {
            const Complex z2 = grid.point(i, static_cast<int>(j));
            double worst = 0.0;
            for (const auto* f : families) {
                worst = std::max(worst, radius_or_inf(f, z2, kappa));
                if (std::isinf(worst)) break;
            }
            out.rho[j * static_cast<std::size_t>(grid.nx) + static_cast<std::size_t>(i)] = worst;
        }
    };
    if (opts.parallel) {
        ForkJoinPool pool(opts.threads > 0 ? opts.threads : default_thread_count());
        pool.run(static_cast<std::size_t>(grid.ny), row);
    } else {
        for (std::size_t j = 0; j < static_cast<std::size_t>(grid.ny); ++j) row(j);
    }

    out.mask.resize(total);
    for (std::size_t k = 0; k < total; ++k) out.mask[k] = out.rho[k] <= 1.0 + kStabilitySlack;
    out.contour = marching_squares(grid, out.rho, 1.0 + kStabilitySlack);
    return out;
}

std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

Matrix amplification(const MethodTableau& t, const AmplificationQuery& query)
{
    if (query.kappa < 0) throw InvalidArgument("amplification: kappa must be non-negative");
    return AmplificationFamily(t, query.z1)(query.z2, query.kappa);
}

double spectral_radius(const Matrix& m)
{
    if (m.rows() != m.cols()) throw InvalidArgument("spectral_radius: matrix must be square");
    if (!m.allFinite()) throw InvalidArgument("spectral_radius: matrix has non-finite entries");
    if (m.rows() == 0) return 0.0;
    const Eigen::ComplexEigenSolver<Matrix> solver(m, false);
    if (solver.info() != Eigen::Success) {
        std::ostringstream os;
        os << "complex eigensolver did not converge for\n" << m;
        throw EigenSolverFailure(os.str());
    }
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

double amplification_radius(const MethodTableau& t, Complex z1, Complex z2, int kappa)
{
    const auto family = make_family(t, z1);
    return radius_or_inf(family.get(), z2, kappa);
}

double Grid::re(int i) const
{
    return nx == 1 ? re_min : re_min + (re_max - re_min) * i / (nx - 1);
}

double Grid::im(int j) const
{
    return ny == 1 ? im_min : im_min + (im_max - im_min) * j / (ny - 1);
}

double Grid::cell_area() const
{
    const double dx = nx > 1 ? (re_max - re_min) / (nx - 1) : 1.0;
    const double dy = ny > 1 ? (im_max - im_min) / (ny - 1) : 1.0;
    return dx * dy;
}

void validate(const Grid& grid)
{
    if (grid.nx < 1 || grid.ny < 1) throw InvalidArgument("grid must have at least one sample per axis");
    if (!(grid.re_max >= grid.re_min) || !(grid.im_max >= grid.im_min))
        throw InvalidArgument("grid bounds are inverted");
    if (grid.nx > 1 && grid.re_max == grid.re_min) throw InvalidArgument("grid has zero width");
    if (grid.ny > 1 && grid.im_max == grid.im_min) throw InvalidArgument("grid has zero height");
}

std::size_t RegionScan::stable_count() const
{
    return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
}

RegionScan region_S(Complex z1, const MethodTableau& t, int kappa, const Grid& grid, const ScanOptions& opts)
{
    const auto family = make_family(t, z1);
    return scan({family.get()}, kappa, grid, opts);
}

RegionScan region_S_hat(Complex z1, const MethodTableau& t, int kappa, const Grid& grid, const ScanOptions& opts)
{
    const auto family = make_family(t, z1);
    if (z1.imag() == 0.0) return scan({family.get()}, kappa, grid, opts);
    const auto mirror = make_family(t, std::conj(z1));
    return scan({family.get(), mirror.get()}, kappa, grid, opts);
}

WedgeSampling default_wedge_sampling()
{
    WedgeSampling s;
    s.gammas.push_back(0.0);
    constexpr int kCount = 60;
    for (int k = 0; k < kCount; ++k) s.gammas.push_back(std::pow(10.0, -3.0 + 6.0 * k / (kCount - 1)));
    s.rays = 5;
    return s;
}

RegionScan region_S_tilde(double theta, const MethodTableau& t, int kappa, const Grid& grid,
                          const WedgeSampling& sampling, const ScanOptions& opts)
{
    if (!(theta >= 0.0 && theta <= std::numbers::pi)) throw InvalidArgument("region_S_tilde: theta must be in [0, pi]");
    if (sampling.gammas.empty() || sampling.rays < 1) throw InvalidArgument("region_S_tilde: empty wedge sampling");
    if (!std::is_sorted(sampling.gammas.begin(), sampling.gammas.end()) || sampling.gammas.front() < 0.0)
        throw InvalidArgument("region_S_tilde: gamma samples must be non-negative and increasing");

    std::vector<double> omegas;
    const int rays = theta == std::numbers::pi ? 1 : sampling.rays;
    for (int k = 0; k < rays; ++k)
        omegas.push_back(rays == 1 ? theta : theta + (std::numbers::pi - theta) * k / (rays - 1));

    std::vector<std::unique_ptr<AmplificationFamily>> owned;
    std::vector<const AmplificationFamily*> families;
    auto add = [&](Complex z1) {
        owned.push_back(make_family(t, z1));
        families.push_back(owned.back().get());
    };
    for (double gamma : sampling.gammas) {
        if (gamma == 0.0) {
            add({0.0, 0.0});
            continue;
        }
        for (double omega : omegas) {
            const Complex z1 = std::polar(gamma, omega);
            add(z1);
            if (z1.imag() != 0.0) add(std::conj(z1));
        }
    }
    return scan(families, kappa, grid, opts);
}

std::vector<Polyline> marching_squares(const Grid& grid, const std::vector<double>& field, double level)
{
    const int nx = grid.nx, ny = grid.ny;
    if (field.size() != static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny))
        throw InvalidArgument("marching_squares: field size does not match grid");
    if (nx < 2 || ny < 2) return {};

    auto value = [&](int i, int j) {
        const double v = field[static_cast<std::size_t>(j) * nx + i];
        return std::isfinite(v) ? v - level : 1e300;
    };
    // Edge ids: horizontal (i,j)-(i+1,j) first, then vertical (i,j)-(i,j+1).
    const std::int64_t vertical_offset = static_cast<std::int64_t>(nx - 1) * ny;
    auto h_edge = [&](int i, int j) { return static_cast<std::int64_t>(j) * (nx - 1) + i; };
    auto v_edge = [&](int i, int j) { return vertical_offset + static_cast<std::int64_t>(j) * nx + i; };

    std::unordered_map<std::int64_t, std::array<double, 2>> points;
    auto crossing = [&](std::int64_t id, int ia, int ja, int ib, int jb) {
        if (points.count(id)) return id;
        const double va = value(ia, ja), vb = value(ib, jb);
        const double s = va / (va - vb);
        const double x = grid.re(ia) + s * (grid.re(ib) - grid.re(ia));
        const double y = grid.im(ja) + s * (grid.im(jb) - grid.im(ja));
        points[id] = {x, y};
        return id;
    };

    std::vector<std::array<std::int64_t, 2>> segments;
    for (int j = 0; j + 1 < ny; ++j) {
        for (int i = 0; i + 1 < nx; ++i) {
            const double v00 = value(i, j), v10 = value(i + 1, j), v11 = value(i + 1, j + 1), v01 = value(i, j + 1);
            const bool in00 = v00 <= 0, in10 = v10 <= 0, in11 = v11 <= 0, in01 = v01 <= 0;
            const bool bottom = in00 != in10, right = in10 != in11, top = in01 != in11, left = in00 != in01;
            const int crossings = bottom + right + top + left;
            if (crossings == 0) continue;

            auto eb = [&] { return crossing(h_edge(i, j), i, j, i + 1, j); };
            auto er = [&] { return crossing(v_edge(i + 1, j), i + 1, j, i + 1, j + 1); };
            auto et = [&] { return crossing(h_edge(i, j + 1), i, j + 1, i + 1, j + 1); };
            auto el = [&] { return crossing(v_edge(i, j), i, j, i, j + 1); };

            if (crossings == 2) {
                std::vector<std::int64_t> ends;
                if (bottom) ends.push_back(eb());
                if (right) ends.push_back(er());
                if (top) ends.push_back(et());
                if (left) ends.push_back(el());
                segments.push_back({ends[0], ends[1]});
            } else {
                // Saddle: disambiguate with the cell-centre average.
                const bool centre_in = 0.25 * (v00 + v10 + v11 + v01) <= 0;
                if (centre_in == in00) {
                    segments.push_back({eb(), er()});
                    segments.push_back({et(), el()});
                } else {
                    segments.push_back({el(), eb()});
                    segments.push_back({er(), et()});
                }
            }
        }
    }

    // Chain segments sharing an edge crossing into polylines.
    std::unordered_map<std::int64_t, std::vector<std::size_t>> incident;
    for (std::size_t s = 0; s < segments.size(); ++s)
        for (auto id : segments[s]) incident[id].push_back(s);

    std::vector<bool> used(segments.size(), false);
    std::vector<Polyline> lines;
    auto walk = [&](std::size_t first, std::int64_t from) {
        Polyline line{points.at(from)};
        std::size_t seg = first;
        std::int64_t at = from;
        while (true) {
            used[seg] = true;
            const std::int64_t next = segments[seg][0] == at ? segments[seg][1] : segments[seg][0];
            line.push_back(points.at(next));
            at = next;
            std::size_t follow = segments.size();
            for (auto cand : incident[at])
                if (!used[cand]) {
                    follow = cand;
                    break;
                }
            if (follow == segments.size()) break;
            seg = follow;
        }
        lines.push_back(std::move(line));
    };
    // Open chains start at crossings used by a single segment (grid border).
    for (std::size_t s = 0; s < segments.size(); ++s) {
        if (used[s]) continue;
        for (auto id : segments[s])
            if (incident[id].size() == 1) {
                walk(s, id);
                break;
            }
    }
    for (std::size_t s = 0; s < segments.size(); ++s)
        if (!used[s]) walk(s, segments[s][0]);
    return lines;
}

std::string scan_to_csv(const RegionScan& scan)
{
    std::string out = "re_z2,im_z2,rho\n";
    for (int j = 0; j < scan.grid.ny; ++j)
        for (int i = 0; i < scan.grid.nx; ++i) {
            out += format_double(scan.grid.re(i));
            out += ',';
            out += format_double(scan.grid.im(j));
            out += ',';
            out += format_double(scan.rho[static_cast<std::size_t>(j) * scan.grid.nx + i]);
            out += '\n';
        }
    return out;
}

std::string contour_to_csv(const RegionScan& scan)
{
    std::string out = "polyline,re_z2,im_z2\n";
    for (std::size_t k = 0; k < scan.contour.size(); ++k)
        for (const auto& p : scan.contour[k]) {
            out += std::to_string(k);
            out += ',';
            out += format_double(p[0]);
            out += ',';
            out += format_double(p[1]);
            out += '\n';
        }
    return out;
}

}  // namespace fimex
