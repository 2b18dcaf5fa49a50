#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "fimex/parallel.hpp"
#include "fimex/problem.hpp"
#include "fimex/tableaux.hpp"
#include "fimex/types.hpp"

namespace fimex {

enum class NewtonMode {
    Full,        // Jacobian refreshed every iteration
    Simplified,  // Jacobian frozen at the predictor
};

struct SolverConfig {
    /// Newton stops once an increment is below newton_tol * max(1, |Y|), or the
    /// residual stalls at roundoff. At least one correction is always applied.
    double newton_tol = 1e-14;
    int newton_max_iters = 50;
    NewtonMode newton_mode = NewtonMode::Full;
    /// Evaluate the q node-wise f1/f2 calls concurrently.
    bool parallel = false;
    /// Worker count for `parallel`; 0 means default_thread_count().
    int threads = 0;
};

/// q solution values y[j] ~ y(t_anchor + r z_j) together with the explicit
/// derivatives at the same nodes.
struct BlockState {
    double t_anchor = 0.0;
    double r = 0.0;
    Block y;
    Block f2;
    bool f2_fresh = false;
    /// Iterator applications since the last propagator step (or start).
    int iterations_applied = 0;
};

struct MethodSpec {
    Variant variant = Variant::RadauStar;
    int q = 3;
    int kappa = 0;
};

struct SolveStats {
    long f1_evaluations = 0;
    long f2_evaluations = 0;
    long jacobian_evaluations = 0;
    long newton_iterations = 0;
    long block_solves = 0;
};

/// Composite FIMEX stepper: one propagator application followed by kappa
/// iterator applications per macro-step.
class Stepper {
public:
    Stepper(MethodTableau tableau, PartitionedProblem problem, SolverConfig cfg = {});

    const MethodTableau& tableau() const { return tableau_; }
    const PartitionedProblem& problem() const { return problem_; }
    const SolverConfig& config() const { return cfg_; }
    const SolveStats& stats() const { return stats_; }

    double node_time(const BlockState& s, int j) const { return s.t_anchor + s.r * tableau_.nodes.z[static_cast<std::size_t>(j)]; }

    /// Advances the block by h = 2r.
    BlockState propagate(const BlockState& state);

    /// Re-solves the current block (anchor unchanged); raises the accuracy of
    /// nodes 2..q by one order.
    BlockState iterate(const BlockState& state);

    /// Constant block y0 on nodes translated to [0, 2] (node 1 at t0), then
    /// kappa_start iterator applications.
    BlockState start(const Vector& y0, double t0, double r, int kappa_start);

    /// Recomputes f2 at every node (after a splitting refresh, for example).
    void refresh_explicit(BlockState& state);

    /// Solves Y = rhs_const + r (w (x) I) f1(t_nodes, Y) for Y. Nodes whose
    /// column in w is zero are not unknowns; their outputs follow explicitly.
    Block solve_block_implicit(const Block& rhs_const, const RealMatrix& w, std::span<const double> t_nodes, double r,
                               const Block& guess);

private:
    struct DiagonalFactors {
        double r = 0.0;
        RealMatrix w;
        std::vector<int> unknowns;
        std::vector<Matrix> inverses;  // one (|unknowns| x |unknowns|) inverse per component
    };

    Block solve_dense(const Block& rhs_const, const RealMatrix& w, std::span<const double> t_nodes, double r,
                      const Block& guess, const std::vector<int>& unknowns);
    Block solve_diagonal(const Block& rhs_const, const RealMatrix& w, double r, const Vector& diag,
                         const std::vector<int>& unknowns);
    const DiagonalFactors& diagonal_factors(const RealMatrix& w, double r, const Vector& diag,
                                            const std::vector<int>& unknowns);

    Block apply_coefficients(const RealMatrix& a, const Block& y, const RealMatrix& b, const Block& f, double r) const;
    void evaluate_explicit(BlockState& state, std::optional<std::pair<int, const Vector*>> reuse_first);
    void for_each_node(std::size_t count, const std::function<void(std::size_t)>& fn);
    Matrix jacobian_f1(double t, const Vector& y);

    MethodTableau tableau_;
    PartitionedProblem problem_;
    SolverConfig cfg_;
    SolveStats stats_;
    bool copies_first_node_ = false;
    std::vector<DiagonalFactors> diagonal_cache_;
    std::unique_ptr<ForkJoinPool> pool_;
};

/// Default number of starting iterations: enough for the start-up block to
/// carry local error O(r^{p+1}) where p is the composite order, and never
/// fewer than q-1 (Radau) / q (RadauStar).
int default_kappa_start(const MethodSpec& method);

struct IntegrationResult {
    Vector y_end;
    double t_end = 0.0;
    double h = 0.0;
    int n_steps = 0;
    SolveStats stats;
};

/// Integrates from t0 to t_end with step h = (t_end - t0) / n_steps and node
/// radius r = h / 2. The start-up block covers the first step [t0, t0 + h];
/// the remaining n_steps - 1 steps are composite propagator + kappa iterator
/// applications. Returns the value at the last node, which sits at t_end.
IntegrationResult integrate(const PartitionedProblem& problem, const Vector& y0, const MethodSpec& method, double t0,
                            double t_end, int n_steps, const SolverConfig& cfg = {},
                            std::optional<int> kappa_start = std::nullopt);

}  // namespace fimex
