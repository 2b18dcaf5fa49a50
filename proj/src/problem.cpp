#include "fimex/problem.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "fimex/errors.hpp"

namespace fimex {

namespace {

// Shared frozen Jacobian for the linearly implicit splittings. The integrator
// refreshes it between macro-steps; evaluations only read it.
struct FrozenLinearization {
    Matrix jn;
};

PartitionedProblem linearly_implicit(const AdditiveRhs& rhs, JacobianFunction linearization)
{
    auto frozen = std::make_shared<FrozenLinearization>();
    frozen->jn = Matrix::Zero(rhs.dim, rhs.dim);

    PartitionedProblem p;
    p.dim = rhs.dim;
    p.f1 = [frozen](double, const Vector& y) -> Vector { return frozen->jn * y; };
    p.f2 = [frozen, a = rhs.a, b = rhs.b](double t, const Vector& y) -> Vector {
        return a(t, y) + b(t, y) - frozen->jn * y;
    };
    p.jacobian_f1 = [frozen](double, const Vector&) -> Matrix { return frozen->jn; };
    p.refresh_linearization = [frozen, linearization = std::move(linearization)](double t, const Vector& y) {
        frozen->jn = linearization(t, y);
    };
    return p;
}

}  // namespace

std::string_view to_string(SplittingKind kind)
{
    switch (kind) {
    case SplittingKind::Semilinear: return "semilinear";
    case SplittingKind::FullyImplicit: return "fully-implicit";
    case SplittingKind::LinearlyImplicitFirst: return "linearly-implicit-first";
    case SplittingKind::LinearlyImplicitJacobian: return "linearly-implicit";
    }
    return "unknown";
}

SplittingKind parse_splitting(std::string_view s)
{
    if (s == "semilinear") return SplittingKind::Semilinear;
    if (s == "fully-implicit" || s == "semi-implicit") return SplittingKind::FullyImplicit;
    if (s == "linearly-implicit-first") return SplittingKind::LinearlyImplicitFirst;
    if (s == "linearly-implicit" || s == "linearly-implicit-jacobian") return SplittingKind::LinearlyImplicitJacobian;
    throw InvalidArgument("unknown splitting '" + std::string(s) + "'");
}

PartitionedProblem make_semilinear(Matrix linear, RhsFunction nonlinear)
{
    if (linear.rows() != linear.cols()) throw InvalidArgument("make_semilinear: linear operator must be square");
    PartitionedProblem p;
    p.dim = linear.rows();
    auto shared = std::make_shared<const Matrix>(std::move(linear));
    p.f1 = [shared](double, const Vector& y) -> Vector { return *shared * y; };
    p.f2 = std::move(nonlinear);
    p.jacobian_f1 = [shared](double, const Vector&) -> Matrix { return *shared; };
    return p;
}

PartitionedProblem make_semilinear_diagonal(Vector diag, RhsFunction nonlinear)
{
    PartitionedProblem p;
    p.dim = diag.size();
    p.f1 = [diag](double, const Vector& y) -> Vector { return diag.cwiseProduct(y); };
    p.f2 = std::move(nonlinear);
    p.jacobian_f1 = [diag](double, const Vector&) -> Matrix { return diag.asDiagonal(); };
    p.implicit_structure = DiagonalLinear{std::move(diag)};
    return p;
}

PartitionedProblem make_fully_implicit(const AdditiveRhs& rhs)
{
    PartitionedProblem p;
    p.dim = rhs.dim;
    p.f1 = rhs.a;
    p.f2 = rhs.b;
    p.jacobian_f1 = rhs.jacobian_a;
    return p;
}

PartitionedProblem make_linearly_implicit_first(const AdditiveRhs& rhs)
{
    if (!rhs.jacobian_a) throw InvalidArgument("linearly implicit splitting needs the Jacobian of A");
    return linearly_implicit(rhs, rhs.jacobian_a);
}

PartitionedProblem make_linearly_implicit_jacobian(const AdditiveRhs& rhs)
{
    if (!rhs.jacobian_a || !rhs.jacobian_b)
        throw InvalidArgument("Jacobian splitting needs the Jacobians of both components");
    return linearly_implicit(rhs, [ja = rhs.jacobian_a, jb = rhs.jacobian_b](double t, const Vector& y) -> Matrix {
        return ja(t, y) + jb(t, y);
    });
}

PartitionedProblem make_splitting(SplittingKind kind, const AdditiveRhs& rhs)
{
    switch (kind) {
    case SplittingKind::Semilinear: {
        if (!rhs.jacobian_a) throw InvalidArgument("semilinear splitting needs the linear operator");
        return make_semilinear(rhs.jacobian_a(0.0, Vector::Zero(rhs.dim)), rhs.b);
    }
    case SplittingKind::FullyImplicit: return make_fully_implicit(rhs);
    case SplittingKind::LinearlyImplicitFirst: return make_linearly_implicit_first(rhs);
    case SplittingKind::LinearlyImplicitJacobian: return make_linearly_implicit_jacobian(rhs);
    }
    throw InvalidArgument("unknown splitting kind");
}

Matrix finite_difference_jacobian(const RhsFunction& f, double t, const Vector& y)
{
    const auto n = y.size();
    const Vector f0 = f(t, y);
    Matrix jac(f0.size(), n);
    const double root_eps = std::sqrt(std::numeric_limits<double>::epsilon());
    Vector yp = y;
    for (Eigen::Index j = 0; j < n; ++j) {
        const double delta = root_eps * std::max(1.0, std::abs(y[j]));
        yp[j] = y[j] + delta;
        jac.col(j) = (f(t, yp) - f0) / delta;
        yp[j] = y[j];
    }
    return jac;
}

}  // namespace fimex
