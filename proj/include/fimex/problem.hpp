#pragma once

#include <functional>
#include <memory>
#include <string_view>
#include <variant>

#include "fimex/types.hpp"

namespace fimex {

using RhsFunction = std::function<Vector(double t, const Vector& y)>;
using JacobianFunction = std::function<Matrix(double t, const Vector& y)>;
using LinearizationHook = std::function<void(double t, const Vector& y)>;

struct DenseStructure {};

/// f1(t, y) = diag .* y; the block solve decouples into one small system per
/// component.
struct DiagonalLinear {
    Vector diag;
};

using ImplicitStructure = std::variant<DenseStructure, DiagonalLinear>;

/// y' = f1(t, y) + f2(t, y) with f1 treated implicitly and f2 explicitly.
///
/// Evaluators may be called concurrently on distinct arguments and must not
/// mutate shared state. `refresh_linearization`, when set, is invoked by the
/// integrator once per macro-step (never concurrently with evaluations) and
/// may update the splitting, e.g. a frozen Jacobian.
struct PartitionedProblem {
    Eigen::Index dim = 0;
    RhsFunction f1;
    RhsFunction f2;
    JacobianFunction jacobian_f1;  // optional: finite differences when empty
    ImplicitStructure implicit_structure = DenseStructure{};
    LinearizationHook refresh_linearization;
};

enum class SplittingKind {
    Semilinear,                // f1 = L y, f2 = N(t, y)
    FullyImplicit,             // f1 = A, f2 = B
    LinearlyImplicitFirst,     // f1 = dA/dy(t_n, y_n) y, f2 = A + B - f1
    LinearlyImplicitJacobian,  // f1 = J_n y, f2 = A + B - J_n y
};

std::string_view to_string(SplittingKind kind);
SplittingKind parse_splitting(std::string_view s);

/// y' = A(t, y) + B(t, y) with optional Jacobians of each part.
struct AdditiveRhs {
    Eigen::Index dim = 0;
    RhsFunction a;
    RhsFunction b;
    JacobianFunction jacobian_a;
    JacobianFunction jacobian_b;
};

PartitionedProblem make_semilinear(Matrix linear, RhsFunction nonlinear);
PartitionedProblem make_semilinear_diagonal(Vector diag, RhsFunction nonlinear);
PartitionedProblem make_fully_implicit(const AdditiveRhs& rhs);

/// J_n = dA/dy at the step anchor; requires rhs.jacobian_a.
PartitionedProblem make_linearly_implicit_first(const AdditiveRhs& rhs);

/// J_n = dA/dy + dB/dy at the step anchor (the full Jacobian); requires both
/// Jacobians.
PartitionedProblem make_linearly_implicit_jacobian(const AdditiveRhs& rhs);

/// Builds the splitting named by `kind`. Semilinear treats `a` as the linear
/// part and needs jacobian_a (evaluated once at the origin).
PartitionedProblem make_splitting(SplittingKind kind, const AdditiveRhs& rhs);

/// Finite-difference Jacobian of f at (t, y) along real directions.
Matrix finite_difference_jacobian(const RhsFunction& f, double t, const Vector& y);

}  // namespace fimex
