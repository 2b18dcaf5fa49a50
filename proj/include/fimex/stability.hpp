#pragma once

#include <array>
#include <string>
#include <vector>

#include "fimex/tableaux.hpp"
#include "fimex/types.hpp"

namespace fimex {

/// Partitioned Dahlquist point y' = lambda1 y + lambda2 y with z_k = h lambda_k
/// (h = 2r, so the coefficient form sees w_k = z_k / 2).
struct AmplificationQuery {
    Complex z1;
    Complex z2;
    int kappa = 0;
};

/// M = M_it^kappa * M_prop with
///   M_prop = (I - w1 B1)^{-1} (A + w2 B2),
///   M_it   = (I - w1 B_it)^{-1} (A_tilde + w2 B_it).
/// Throws PoleError when a resolvent is singular.
Matrix amplification(const MethodTableau& t, const AmplificationQuery& query);

/// Largest eigenvalue magnitude via complex Schur decomposition.
double spectral_radius(const Matrix& m);

/// rho(M(z1, z2)), +infinity at poles.
double amplification_radius(const MethodTableau& t, Complex z1, Complex z2, int kappa);

/// Rectangular sample grid in the z2-plane; nx samples along Re, ny along Im.
struct Grid {
    double re_min = -8.0;
    double re_max = 8.0;
    double im_min = -8.0;
    double im_max = 8.0;
    int nx = 401;
    int ny = 401;

    double re(int i) const;
    double im(int j) const;
    Complex point(int i, int j) const { return {re(i), im(j)}; }
    double cell_area() const;
};

/// Throws InvalidArgument for empty or inverted grids.
void validate(const Grid& grid);

using Polyline = std::vector<std::array<double, 2>>;

/// Spectral radius sampled on a grid (row-major, index j * nx + i), the
/// stability mask rho <= 1 + 1e-12, and the rho = 1 level set.
struct RegionScan {
    Grid grid;
    std::vector<double> rho;
    std::vector<bool> mask;
    std::vector<Polyline> contour;

    bool stable(int i, int j) const { return mask[static_cast<std::size_t>(j) * grid.nx + i]; }
    std::size_t stable_count() const;
    double stable_area() const { return static_cast<double>(stable_count()) * grid.cell_area(); }
};

inline constexpr double kStabilitySlack = 1e-12;

struct ScanOptions {
    bool parallel = false;
    int threads = 0;
};

/// S(z1): stability slice for fixed z1.
RegionScan region_S(Complex z1, const MethodTableau& t, int kappa, const Grid& grid, const ScanOptions& opts = {});

/// S-hat(z1): pointwise max over z1 and conj(z1).
RegionScan region_S_hat(Complex z1, const MethodTableau& t, int kappa, const Grid& grid,
                        const ScanOptions& opts = {});

/// Wedge sampling for S-tilde(theta): gamma samples (must be increasing) and
/// the number of rays spread over [theta, pi] (conjugate rays come from the
/// S-hat max).
struct WedgeSampling {
    std::vector<double> gammas;
    int rays = 5;
};

/// gamma = 0 plus 60 log-spaced values on [1e-3, 1e3], five rays.
WedgeSampling default_wedge_sampling();

/// S-tilde(theta): stable for every sampled z1 = gamma e^{i omega} with
/// omega in [theta, 2 pi - theta].
RegionScan region_S_tilde(double theta, const MethodTableau& t, int kappa, const Grid& grid,
                          const WedgeSampling& sampling = default_wedge_sampling(), const ScanOptions& opts = {});

/// Marching squares on (field - level) with linear edge interpolation. Field
/// is row-major ny x nx; non-finite values are treated as above the level.
std::vector<Polyline> marching_squares(const Grid& grid, const std::vector<double>& field, double level);

/// CSV with columns re_z2,im_z2,rho (one row per grid point).
std::string scan_to_csv(const RegionScan& scan);

/// CSV with columns polyline,re_z2,im_z2.
std::string contour_to_csv(const RegionScan& scan);

}  // namespace fimex
