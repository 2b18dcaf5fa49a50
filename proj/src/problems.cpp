#include "fimex/problems.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include "fimex/errors.hpp"
#include "fimex/fft.hpp"

namespace fimex {

// ---------------------------------------------------------------- Dahlquist

PartitionedProblem DahlquistProblem::partitioned() const
{
    PartitionedProblem p;
    p.dim = 1;
    p.f1 = [l = lambda1](double, const Vector& y) -> Vector { return l * y; };
    p.f2 = [l = lambda2](double, const Vector& y) -> Vector { return l * y; };
    p.jacobian_f1 = [l = lambda1](double, const Vector&) -> Matrix { return Matrix::Constant(1, 1, l); };
    return p;
}

// ------------------------------------------------------------- Van der Pol

std::string_view to_string(VdpSplitting s)
{
    return s == VdpSplitting::SemiImplicit ? "semi-implicit" : "linearly-implicit";
}

VdpSplitting parse_vdp_splitting(std::string_view s)
{
    if (s == "semi-implicit") return VdpSplitting::SemiImplicit;
    if (s == "linearly-implicit" || s == "linearly-implicit-jacobian") return VdpSplitting::LinearlyImplicitJacobian;
    throw InvalidArgument("unknown Van der Pol splitting '" + std::string(s) + "'");
}

Vector VanDerPolProblem::initial_value() const
{
    const double e = epsilon;
    Vector y(2);
    y << 2.0, -2.0 / 3.0 + 10.0 * e / 81.0 - 292.0 * e * e / 2187.0 - 1814.0 * e * e * e / 19683.0;
    return y;
}

Vector VanDerPolProblem::rhs(const Vector& y) const
{
    Vector f(2);
    f << y[1], ((1.0 - y[0] * y[0]) * y[1] - y[0]) / epsilon;
    return f;
}

Matrix VanDerPolProblem::jacobian(const Vector& y) const
{
    Matrix j(2, 2);
    j << 0.0, 1.0, (-2.0 * y[0] * y[1] - 1.0) / epsilon, (1.0 - y[0] * y[0]) / epsilon;
    return j;
}

AdditiveRhs VanDerPolProblem::additive() const
{
    if (!(epsilon > 0.0)) throw InvalidArgument("Van der Pol: epsilon must be positive");
    const double e = epsilon;
    AdditiveRhs rhs;
    rhs.dim = 2;
    rhs.a = [e](double, const Vector& y) -> Vector {
        Vector f(2);
        f << 0.0, ((1.0 - y[0] * y[0]) * y[1] - y[0]) / e;
        return f;
    };
    rhs.b = [](double, const Vector& y) -> Vector {
        Vector f(2);
        f << y[1], 0.0;
        return f;
    };
    rhs.jacobian_a = [e](double, const Vector& y) -> Matrix {
        Matrix j = Matrix::Zero(2, 2);
        j(1, 0) = (-2.0 * y[0] * y[1] - 1.0) / e;
        j(1, 1) = (1.0 - y[0] * y[0]) / e;
        return j;
    };
    rhs.jacobian_b = [](double, const Vector&) -> Matrix {
        Matrix j = Matrix::Zero(2, 2);
        j(0, 1) = 1.0;
        return j;
    };
    return rhs;
}

PartitionedProblem vdp_rhs_components(VdpSplitting splitting, double eps)
{
    const auto rhs = VanDerPolProblem{eps}.additive();
    switch (splitting) {
    case VdpSplitting::SemiImplicit: return make_fully_implicit(rhs);
    case VdpSplitting::LinearlyImplicitJacobian: return make_linearly_implicit_jacobian(rhs);
    }
    throw InvalidArgument("unknown Van der Pol splitting");
}

// -------------------------------------------------------------------- KdV

namespace {

void check_kdv_size(int n)
{
    if (n < 4 || !is_power_of_two(static_cast<std::size_t>(n)))
        throw InvalidArgument("KdV: N must be a power of two >= 4, got " + std::to_string(n));
}

}  // namespace

Vector KdvSpectralProblem::symbol() const
{
    check_kdv_size(N);
    Vector l(N);
    for (int j = 0; j < N; ++j) {
        const double pk = std::numbers::pi * wavenumber(j);
        l[j] = Complex(0.0, delta * pk * pk * pk);
    }
    return l;
}

Vector KdvSpectralProblem::dealias(const Vector& uhat) const
{
    Vector out = uhat;
    for (int j = 0; j < N; ++j)
        if (std::abs(wavenumber(j)) > cutoff()) out[j] = 0.0;
    return out;
}

Vector KdvSpectralProblem::nonlinear(const Vector& uhat) const
{
    const Vector u = to_physical(uhat);
    const Vector square_hat = to_spectral(u.cwiseProduct(u));
    Vector out(N);
    for (int j = 0; j < N; ++j) {
        const int k = wavenumber(j);
        out[j] = std::abs(k) > cutoff() ? Complex(0.0) : Complex(0.0, -0.5 * std::numbers::pi * k) * square_hat[j];
    }
    return out;
}

Vector KdvSpectralProblem::grid() const
{
    Vector x(N);
    for (int j = 0; j < N; ++j) x[j] = 2.0 * j / N;
    return x;
}

Vector KdvSpectralProblem::to_spectral(const Vector& u) const { return fft_forward(u) / static_cast<double>(N); }

Vector KdvSpectralProblem::to_physical(const Vector& uhat) const { return fft_inverse(uhat) * static_cast<double>(N); }

Vector KdvSpectralProblem::initial_state() const
{
    check_kdv_size(N);
    const Vector x = grid();
    Vector u(N);
    for (int j = 0; j < N; ++j) u[j] = std::cos(std::numbers::pi * x[j].real());
    return to_spectral(u);
}

PartitionedProblem KdvSpectralProblem::partitioned() const
{
    check_kdv_size(N);
    return make_semilinear_diagonal(symbol(), [self = *this](double, const Vector& uhat) { return self.nonlinear(uhat); });
}

PartitionedProblem kdv_problem(int N, double delta) { return KdvSpectralProblem{N, delta}.partitioned(); }

// ------------------------------------------------------- reference cache

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

std::uint64_t fnv1a(const unsigned char* data, std::size_t n, std::uint64_t h = kFnvOffset)
{
    for (std::size_t i = 0; i < n; ++i) {
        h ^= data[i];
        h *= kFnvPrime;
    }
    return h;
}

std::uint64_t to_little_endian(std::uint64_t v)
{
    if constexpr (std::endian::native == std::endian::little) return v;
    std::uint64_t out = 0;
    for (int b = 0; b < 8; ++b) out |= ((v >> (8 * b)) & 0xffu) << (8 * (7 - b));
    return out;
}

std::vector<unsigned char> encode(const Vector& v)
{
    std::vector<unsigned char> bytes;
    bytes.reserve(static_cast<std::size_t>(v.size()) * 16);
    auto push = [&](double d) {
        const std::uint64_t le = to_little_endian(std::bit_cast<std::uint64_t>(d));
        for (int b = 0; b < 8; ++b) bytes.push_back(static_cast<unsigned char>((le >> (8 * b)) & 0xffu));
    };
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        push(v[i].real());
        push(v[i].imag());
    }
    return bytes;
}

Vector decode(const std::vector<unsigned char>& bytes)
{
    const std::size_t n = bytes.size() / 16;
    Vector v(static_cast<Eigen::Index>(n));
    auto read = [&](std::size_t offset) {
        std::uint64_t le = 0;
        for (int b = 0; b < 8; ++b) le |= static_cast<std::uint64_t>(bytes[offset + b]) << (8 * b);
        return std::bit_cast<double>(to_little_endian(le));
    };
    for (std::size_t i = 0; i < n; ++i) v[static_cast<Eigen::Index>(i)] = {read(16 * i), read(16 * i + 8)};
    return v;
}

std::string hex(std::uint64_t v)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace

nlohmann::json ReferenceKey::to_json() const
{
    return {{"problem", problem},
            {"params", params},
            {"method", {{"variant", std::string(to_string(method.variant))}, {"q", method.q}, {"kappa", method.kappa}}},
            {"t_end", t_end},
            {"n_steps", n_steps}};
}

std::filesystem::path reference_cache_dir()
{
    if (const char* env = std::getenv("FIMEX_CACHE_DIR"); env != nullptr && *env != '\0') return env;
    return std::filesystem::temp_directory_path() / "fimex-cache";
}

std::uint64_t payload_checksum(const Vector& v)
{
    const auto bytes = encode(v);
    return fnv1a(bytes.data(), bytes.size());
}

Vector cached_reference(const ReferenceKey& key, const std::function<Vector()>& generate,
                        const std::filesystem::path& dir)
{
    const nlohmann::json key_json = key.to_json();
    const std::string dumped = key_json.dump();
    const std::string stem =
        key.problem + "-" + hex(fnv1a(reinterpret_cast<const unsigned char*>(dumped.data()), dumped.size()));
    const auto data_path = dir / (stem + ".bin");
    const auto meta_path = dir / (stem + ".json");

    if (std::ifstream meta_in(meta_path); meta_in) {
        try {
            const auto meta = nlohmann::json::parse(meta_in);
            std::ifstream data_in(data_path, std::ios::binary);
            const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(data_in)), {});
            if (meta.at("key") == key_json && bytes.size() == 16 * meta.at("dim").get<std::size_t>() &&
                meta.at("checksum").get<std::string>() == hex(fnv1a(bytes.data(), bytes.size())))
                return decode(bytes);
        } catch (const nlohmann::json::exception&) {
            // fall through and regenerate
        }
    }

    Vector v = generate();
    std::filesystem::create_directories(dir);
    const auto bytes = encode(v);
    {
        std::ofstream out(data_path, std::ios::binary | std::ios::trunc);
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    }
    nlohmann::json meta = {{"key", key_json},
                           {"dim", v.size()},
                           {"format", "f64-le interleaved re/im"},
                           {"checksum", hex(fnv1a(bytes.data(), bytes.size()))}};
    std::ofstream(meta_path, std::ios::trunc) << meta.dump(2) << '\n';
    return v;
}

Vector vdp_reference(double eps, VdpSplitting splitting, int n_steps, double t_end)
{
    const ReferenceKey key{"vdp",
                           {{"epsilon", eps}, {"splitting", std::string(to_string(splitting))}},
                           kReferenceMethod,
                           t_end,
                           n_steps};
    return cached_reference(key, [&] {
        const VanDerPolProblem vdp{eps};
        return integrate(vdp_rhs_components(splitting, eps), vdp.initial_value(), kReferenceMethod, 0.0, t_end,
                         n_steps)
            .y_end;
    });
}

Vector kdv_reference(int N, int n_steps, double t_end)
{
    const KdvSpectralProblem kdv{N};
    const ReferenceKey key{"kdv", {{"N", N}, {"delta", kdv.delta}}, kReferenceMethod, t_end, n_steps};
    return cached_reference(key, [&] {
        return integrate(kdv.partitioned(), kdv.initial_state(), kReferenceMethod, 0.0, t_end, n_steps).y_end;
    });
}

}  // namespace fimex
