#pragma once

#include <string>
#include <string_view>

#include "fimex/nodes.hpp"
#include "fimex/types.hpp"

namespace fimex {

/// Explicit-part interpolant of the propagator: Radau uses the f2 values at
/// input nodes 2..q, RadauStar uses all q input nodes.
enum class Variant { Radau, RadauStar };

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view s);

/// Coefficients of a FIMEX propagator
///   y_out = A y_in + r B1 f1(y_out) + r B2 f2(y_in)
/// and of the shared iterator
///   y_out = A_tilde y_in + r B_it (f1(y_out) + f2(y_in)).
/// All matrices are q x q, dense, with structural zeros materialized.
struct MethodTableau {
    int q = 0;
    Variant variant = Variant::Radau;
    NodeSet nodes;
    RealMatrix A;
    RealMatrix B1;
    RealMatrix B2;
    RealMatrix A_tilde;
    RealMatrix B_it;
};

struct IteratorCoefficients {
    RealMatrix A_tilde;
    RealMatrix B_it;
};

MethodTableau build_propagator(int q, Variant variant);
IteratorCoefficients build_iterator(int q);

/// Classical orders: min(2q-3, q-1+kappa) for Radau, min(2q-3, q+kappa) for
/// RadauStar.
int expected_order(Variant variant, int q, int kappa);

/// The propagator recast as an IMEX general linear method on the augmented
/// state (y, r f1, r f2) with q stages. The step parameter is the node radius
/// r (the coefficient form is written in r, not h = 2r).
struct GlmEmbedding {
    RealMatrix U;   // q x 3q
    RealMatrix V;   // 3q x 3q
    RealMatrix A1;  // q x q, implicit stage coupling
    RealMatrix A2;  // q x q, explicit stage coupling (zero here)
    RealMatrix Bg1; // 3q x q
    RealMatrix Bg2; // 3q x q
};

GlmEmbedding to_glm(const MethodTableau& t);

/// One GLM step on y' = lambda1 y + lambda2 y. `augmented` has length 3q
/// (scalar problem): solution block, then r f1, then r f2 at the input nodes.
Vector glm_step_dahlquist(const GlmEmbedding& glm, const Vector& augmented, Complex lambda1, Complex lambda2,
                          double r);

enum class CoeffFormat { Csv, Json };

/// Serializes every matrix with 17 significant digits.
std::string export_coeffs(const MethodTableau& t, CoeffFormat format);
MethodTableau import_coeffs(std::string_view text, CoeffFormat format);

}  // namespace fimex
