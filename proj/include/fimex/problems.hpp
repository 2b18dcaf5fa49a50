#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "fimex/integrator.hpp"
#include "fimex/problem.hpp"
#include "fimex/types.hpp"

namespace fimex {

// ---------------------------------------------------------------- Dahlquist

/// y' = lambda1 y + lambda2 y, lambda1 implicit and lambda2 explicit.
struct DahlquistProblem {
    Complex lambda1{-1.0, 0.0};
    Complex lambda2{0.0, 0.0};
    Complex y0{1.0, 0.0};

    PartitionedProblem partitioned() const;
    Complex exact(double t) const { return y0 * std::exp((lambda1 + lambda2) * t); }
};

// ------------------------------------------------------------- Van der Pol

enum class VdpSplitting {
    SemiImplicit,              // y1 explicit, y2 implicit
    LinearlyImplicitJacobian,  // f1 = J_n y with the exact Jacobian at the step anchor
};

std::string_view to_string(VdpSplitting s);
VdpSplitting parse_vdp_splitting(std::string_view s);

/// y1' = y2, y2' = ((1 - y1^2) y2 - y1) / eps.
struct VanDerPolProblem {
    double epsilon = 1.0;

    Vector initial_value() const;
    Vector rhs(const Vector& y) const;
    Matrix jacobian(const Vector& y) const;
    /// A = (0, y2'), B = (y1', 0) with their Jacobians.
    AdditiveRhs additive() const;
};

PartitionedProblem vdp_rhs_components(VdpSplitting splitting, double eps);

// -------------------------------------------------------------------- KdV

/// u_t = -(delta u_xxx + (u^2)_x / 2) on [0, 2) periodic, solved for the
/// Fourier coefficients u(x) = sum_k uhat_k exp(i pi k x), uhat = fft(u) / N.
struct KdvSpectralProblem {
    int N = 512;
    double delta = 0.022;

    /// Integer wavenumber stored at FFT index j (k in [-N/2, N/2)).
    int wavenumber(int j) const { return j < N / 2 ? j : j - N; }
    int cutoff() const { return N / 3; }

    /// L_k = i delta (pi k)^3.
    Vector symbol() const;
    /// Zeros every mode with |k| > N/3.
    Vector dealias(const Vector& uhat) const;
    /// -(i pi k / 2) (u^2)^_k, dealiased.
    Vector nonlinear(const Vector& uhat) const;

    Vector grid() const;  // x_j = 2 j / N
    Vector to_spectral(const Vector& u) const;
    Vector to_physical(const Vector& uhat) const;
    /// Spectrum of cos(pi x).
    Vector initial_state() const;

    PartitionedProblem partitioned() const;
};

PartitionedProblem kdv_problem(int N, double delta = 0.022);

inline constexpr double kKdvEndTime = 3.6 / 3.14159265358979323846;
inline constexpr double kVdpEndTime = 0.5;

// ------------------------------------------------------- reference cache

/// Identifies a cached reference solution; every field enters the cache key.
struct ReferenceKey {
    std::string problem;
    nlohmann::json params;
    MethodSpec method;
    double t_end = 0.0;
    int n_steps = 0;

    nlohmann::json to_json() const;
};

/// Directory from FIMEX_CACHE_DIR, else <tmp>/fimex-cache.
std::filesystem::path reference_cache_dir();

/// FNV-1a over the little-endian f64 payload.
std::uint64_t payload_checksum(const Vector& v);

/// Loads the cached vector for `key`; regenerates it (and rewrites the
/// cache) when the file is missing, the sidecar does not match, or the
/// checksum fails.
Vector cached_reference(const ReferenceKey& key, const std::function<Vector()>& generate,
                        const std::filesystem::path& dir = reference_cache_dir());

inline constexpr MethodSpec kReferenceMethod{Variant::RadauStar, 5, 2};

/// RadauStar(5,2) solution at t_end, cached.
Vector vdp_reference(double eps, VdpSplitting splitting, int n_steps, double t_end = kVdpEndTime);
Vector kdv_reference(int N, int n_steps, double t_end = kKdvEndTime);

}  // namespace fimex
