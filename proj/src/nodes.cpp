#include "fimex/nodes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fimex/errors.hpp"

namespace fimex {

namespace {

std::int64_t binomial(int n, int k)
{
    std::int64_t c = 1;
    for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
    return c;
}

std::vector<std::int64_t> derivative(std::span<const std::int64_t> coeffs)
{
    if (coeffs.size() <= 1) return {0};
    std::vector<std::int64_t> d(coeffs.size() - 1);
    for (std::size_t p = 1; p < coeffs.size(); ++p)
        d[p - 1] = coeffs[p] * static_cast<std::int64_t>(p);
    return d;
}

// Newton on the defining polynomial in the unmapped variable x in [0, 1].
long double polish_root(std::span<const std::int64_t> p, std::span<const std::int64_t> dp, long double x)
{
    for (int it = 0; it < 100; ++it) {
        const long double fx = evaluate_polynomial(p, x);
        const long double dfx = evaluate_polynomial(dp, x);
        if (dfx == 0.0L) break;
        const long double step = fx / dfx;
        x -= step;
        if (std::fabs(step) <= 4.0L * std::numeric_limits<long double>::epsilon() * std::fabs(x)) break;
    }
    return x;
}

// Locates the q-2 interior roots by sign changes on a Chebyshev-clustered
// grid, then narrows each bracket by bisection.
std::vector<long double> bracket_interior_roots(std::span<const std::int64_t> p, int expected)
{
    constexpr int kSamples = 4000;
    std::vector<long double> roots;
    auto grid = [](int k) {
        return 0.5L * (1.0L - std::cos(std::numbers::pi_v<long double> * k / kSamples));
    };
    long double x_prev = grid(0);
    long double f_prev = evaluate_polynomial(p, x_prev);
    for (int k = 1; k < kSamples; ++k) {
        const long double x = grid(k);
        const long double fx = evaluate_polynomial(p, x);
        if ((f_prev < 0) != (fx < 0)) {
            long double lo = x_prev, hi = x, flo = f_prev;
            for (int it = 0; it < 60; ++it) {
                const long double mid = 0.5L * (lo + hi);
                const long double fm = evaluate_polynomial(p, mid);
                if ((fm < 0) == (flo < 0)) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            roots.push_back(0.5L * (lo + hi));
        }
        x_prev = x;
        f_prev = fx;
    }
    if (static_cast<int>(roots.size()) != expected)
        throw Error("radau_nodes: found " + std::to_string(roots.size()) + " interior roots, expected " +
                    std::to_string(expected));
    return roots;
}

}  // namespace

void require_supported_order(int q)
{
    if (q < kMinNodes || q > kMaxNodes)
        throw UnsupportedOrder("node count q=" + std::to_string(q) + " outside supported range [2, 9]");
}

std::vector<double> tabulated_radau_nodes(int q)
{
    // Right-Radau points on [-1, 1] excluding the leading -1, as published
    // to 15 digits.
    static const std::vector<std::vector<double>> table = {
        {1.0},
        {-0.333333333333333, 1.0},
        {-0.689897948556636, 0.289897948556636, 1.0},
        {-0.822824080974592, -0.181066271118531, 0.575318923521694, 1.0},
        {-0.885791607770965, -0.446313972723752, 0.167180864737834, 0.720480271312439, 1.0},
        {-0.920380285897062, -0.603973164252784, -0.124050379505228, 0.390928546707272, 0.802929828402347, 1.0},
        {-0.941367145680430, -0.703842800663031, -0.326030619437691, 0.117343037543100, 0.538467724060109,
         0.853891342639482, 1.0},
    };
    if (q < kMinNodes || q > 8) throw UnsupportedOrder("no tabulated nodes for q=" + std::to_string(q));
    std::vector<double> z{-1.0};
    const auto& row = table[static_cast<std::size_t>(q - 2)];
    z.insert(z.end(), row.begin(), row.end());
    return z;
}

std::vector<std::int64_t> radau_defining_polynomial(int q)
{
    require_supported_order(q);
    // x^{q-2} (x-1)^{q-1} = sum_k C(q-1, k) (-1)^{q-1-k} x^{k+q-2}
    const int degree = 2 * q - 3;
    std::vector<std::int64_t> c(static_cast<std::size_t>(degree + 1), 0);
    for (int k = 0; k <= q - 1; ++k) {
        const std::int64_t sign = ((q - 1 - k) % 2 == 0) ? 1 : -1;
        c[static_cast<std::size_t>(k + q - 2)] = sign * binomial(q - 1, k);
    }
    for (int d = 0; d < q - 2; ++d) c = derivative(c);
    return c;
}

long double evaluate_polynomial(std::span<const std::int64_t> coeffs, long double x)
{
    long double acc = 0.0L;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + static_cast<long double>(*it);
    return acc;
}

NodeSet radau_nodes(int q)
{
    require_supported_order(q);
    const auto p = radau_defining_polynomial(q);
    const auto dp = derivative(p);

    std::vector<long double> seeds;
    if (q <= 8) {
        const auto table = tabulated_radau_nodes(q);
        for (int j = 1; j < q - 1; ++j) seeds.push_back(0.5L * (static_cast<long double>(table[j]) + 1.0L));
    } else {
        seeds = bracket_interior_roots(p, q - 2);
    }

    NodeSet nodes;
    nodes.q = q;
    nodes.z.reserve(static_cast<std::size_t>(q));
    nodes.z.push_back(-1.0);
    for (long double seed : seeds) {
        const long double x = polish_root(p, dp, seed);
        if (std::fabs(x - seed) > 1e-9L) throw Error("radau_nodes: Newton drifted away from its seed");
        nodes.z.push_back(static_cast<double>(2.0L * x - 1.0L));
    }
    nodes.z.push_back(1.0);

    if (!std::is_sorted(nodes.z.begin(), nodes.z.end()) ||
        std::adjacent_find(nodes.z.begin(), nodes.z.end()) != nodes.z.end())
        throw Error("radau_nodes: nodes are not strictly increasing");
    return nodes;
}

RealMatrix quad_weights(std::span<const double> interp_nodes, double a, std::span<const double> b)
{
    const auto n = static_cast<Eigen::Index>(interp_nodes.size());
    if (n == 0) throw InvalidArgument("quad_weights: no interpolation nodes");
    if (n > kMaxNodes) throw InvalidArgument("quad_weights: more than 9 interpolation nodes");
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j)
            if (interp_nodes[i] == interp_nodes[j])
                throw DegenerateInterpolation("quad_weights: repeated interpolation node");

    // V(p, j) = x_j^p, moments(p, i) = (b_i^{p+1} - a^{p+1}) / (p+1).
    Eigen::MatrixXd vander(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        double power = 1.0;
        for (Eigen::Index p = 0; p < n; ++p) {
            vander(p, j) = power;
            power *= interp_nodes[j];
        }
    }
    const auto m = static_cast<Eigen::Index>(b.size());
    Eigen::MatrixXd moments(n, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        double bp = b[i], ap = a;
        for (Eigen::Index p = 0; p < n; ++p) {
            moments(p, i) = (bp - ap) / static_cast<double>(p + 1);
            bp *= b[i];
            ap *= a;
        }
    }
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(vander);
    const Eigen::MatrixXd w = lu.solve(moments);
    RealMatrix out = w.transpose();
    return out;
}

}  // namespace fimex
