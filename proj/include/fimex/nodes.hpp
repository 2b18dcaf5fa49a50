#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fimex/types.hpp"

namespace fimex {

inline constexpr int kMinNodes = 2;
inline constexpr int kMaxNodes = 9;

/// Block-method node set on [-1, 1]: the point -1 followed by the q-1
/// right-Radau points (the last of which is exactly 1).
struct NodeSet {
    int q = 0;
    std::vector<double> z;

    double operator[](std::size_t j) const { return z[j]; }
    std::size_t size() const { return z.size(); }
};

/// Throws UnsupportedOrder unless 2 <= q <= 9.
void require_supported_order(int q);

/// Nodes for q in [2, 9]. Interior Radau points are Newton-polished roots of
/// the defining polynomial, seeded from the tabulated values (q <= 8) or from
/// a sign-change scan on a Chebyshev-clustered grid (q = 9).
NodeSet radau_nodes(int q);

/// Published 15-digit node values for q in [2, 8]; used as Newton seeds.
std::vector<double> tabulated_radau_nodes(int q);

/// Integer coefficients (ascending powers of x) of
///   d^{q-2}/dx^{q-2} ( x^{q-2} (x-1)^{q-1} ),
/// whose zeros on [0, 1] map to z = 2x - 1.
std::vector<std::int64_t> radau_defining_polynomial(int q);

/// Evaluates a polynomial with ascending integer coefficients in extended
/// precision (Horner).
long double evaluate_polynomial(std::span<const std::int64_t> coeffs, long double x);

/// W(i, j) = integral from a to b[i] of the j-th Lagrange basis polynomial
/// on interp_nodes. Solves the transposed Vandermonde system with a
/// partial-pivot LU. Throws DegenerateInterpolation on repeated nodes.
RealMatrix quad_weights(std::span<const double> interp_nodes, double a, std::span<const double> b);

}  // namespace fimex
