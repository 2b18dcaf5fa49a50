#include "fimex/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fimex/errors.hpp"

namespace fimex {

namespace {

constexpr double kDivergenceThreshold = 1e10;
constexpr int kMaxGrowthStreak = 3;
constexpr double kStagnationFactor = 1e3;

double max_abs(const Vector& v)
{
    return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

bool row_is_zero(const RealMatrix& m, Eigen::Index i)
{
    return (m.row(i).array() == 0.0).all();
}

bool row_is_unit(const RealMatrix& m, Eigen::Index i, Eigen::Index col)
{
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        if (m(i, j) != (j == col ? 1.0 : 0.0)) return false;
    return true;
}

std::vector<int> implicit_unknowns(const RealMatrix& w)
{
    std::vector<int> unknowns;
    for (Eigen::Index j = 0; j < w.cols(); ++j)
        if (!(w.col(j).array() == 0.0).all()) unknowns.push_back(static_cast<int>(j));
    return unknowns;
}

template <class E>
[[noreturn]] void rethrow_with_context(const E& e, const std::string& context)
{
    throw E(context + ": " + e.what());
}

}  // namespace

Stepper::Stepper(MethodTableau tableau, PartitionedProblem problem, SolverConfig cfg)
    : tableau_(std::move(tableau)), problem_(std::move(problem)), cfg_(cfg)
{
    if (!(cfg_.newton_tol > 0.0)) throw InvalidArgument("SolverConfig: newton_tol must be positive");
    if (cfg_.newton_max_iters < 1) throw InvalidArgument("SolverConfig: newton_max_iters must be >= 1");
    if (!problem_.f1 || !problem_.f2) throw InvalidArgument("Stepper: problem needs both f1 and f2");
    if (problem_.dim <= 0) throw InvalidArgument("Stepper: problem dimension must be positive");
    if (const auto* d = std::get_if<DiagonalLinear>(&problem_.implicit_structure); d && d->diag.size() != problem_.dim)
        throw InvalidArgument("Stepper: diagonal implicit operator has wrong length");

    const int q = tableau_.q;
    copies_first_node_ = row_is_unit(tableau_.A, 0, q - 1) && row_is_unit(tableau_.A_tilde, 0, 0) &&
                         row_is_zero(tableau_.B1, 0) && row_is_zero(tableau_.B2, 0) && row_is_zero(tableau_.B_it, 0);

    if (cfg_.parallel) {
        const int threads = cfg_.threads > 0 ? cfg_.threads : default_thread_count();
        pool_ = std::make_unique<ForkJoinPool>(std::min(threads, q));
    }
}

void Stepper::for_each_node(std::size_t count, const std::function<void(std::size_t)>& fn)
{
    if (pool_) pool_->run(count, fn);
    else
        for (std::size_t i = 0; i < count; ++i) fn(i);
}

Matrix Stepper::jacobian_f1(double t, const Vector& y)
{
    if (problem_.jacobian_f1) return problem_.jacobian_f1(t, y);
    return finite_difference_jacobian(problem_.f1, t, y);
}

Block Stepper::apply_coefficients(const RealMatrix& a, const Block& y, const RealMatrix& b, const Block& f,
                                  double r) const
{
    const auto q = a.rows();
    Block out(static_cast<std::size_t>(q));
    for (Eigen::Index i = 0; i < q; ++i) {
        Vector& c = out[static_cast<std::size_t>(i)];
        bool started = false;
        for (Eigen::Index j = 0; j < q; ++j) {
            const double aij = a(i, j);
            if (aij == 0.0) continue;
            const Vector& yj = y[static_cast<std::size_t>(j)];
            if (!started) {
                c = aij == 1.0 ? yj : Vector(aij * yj);
                started = true;
            } else {
                c += aij * yj;
            }
        }
        if (!started) c = Vector::Zero(problem_.dim);

        Vector acc;
        bool any = false;
        for (Eigen::Index j = 0; j < q; ++j) {
            const double bij = b(i, j);
            if (bij == 0.0) continue;
            const Vector& fj = f[static_cast<std::size_t>(j)];
            if (!any) {
                acc = bij * fj;
                any = true;
            } else {
                acc += bij * fj;
            }
        }
        if (any) c += r * acc;
    }
    return out;
}

void Stepper::evaluate_explicit(BlockState& state, std::optional<std::pair<int, const Vector*>> reuse)
{
    const auto q = static_cast<std::size_t>(tableau_.q);
    state.f2.resize(q);
    std::vector<std::size_t> todo;
    for (std::size_t j = 0; j < q; ++j) {
        if (reuse && static_cast<std::size_t>(reuse->first) == j) state.f2[j] = *reuse->second;
        else todo.push_back(j);
    }
    for_each_node(todo.size(), [&](std::size_t k) {
        const std::size_t j = todo[k];
        state.f2[j] = problem_.f2(node_time(state, static_cast<int>(j)), state.y[j]);
    });
    stats_.f2_evaluations += static_cast<long>(todo.size());
    state.f2_fresh = true;
}

void Stepper::refresh_explicit(BlockState& state)
{
    evaluate_explicit(state, std::nullopt);
}

Block Stepper::solve_block_implicit(const Block& rhs_const, const RealMatrix& w, std::span<const double> t_nodes,
                                    double r, const Block& guess)
{
    const auto q = static_cast<std::size_t>(w.rows());
    if (rhs_const.size() != q || guess.size() != q || t_nodes.size() != q || w.cols() != w.rows())
        throw InvalidArgument("solve_block_implicit: inconsistent block sizes");
    ++stats_.block_solves;
    const auto unknowns = implicit_unknowns(w);
    if (unknowns.empty()) return rhs_const;
    if (const auto* d = std::get_if<DiagonalLinear>(&problem_.implicit_structure))
        return solve_diagonal(rhs_const, w, r, d->diag, unknowns);
    return solve_dense(rhs_const, w, t_nodes, r, guess, unknowns);
}

Block Stepper::solve_dense(const Block& rhs_const, const RealMatrix& w, std::span<const double> t_nodes, double r,
                           const Block& guess, const std::vector<int>& unknowns)
{
    const auto q = static_cast<Eigen::Index>(rhs_const.size());
    const Eigen::Index n = problem_.dim;
    const auto m = static_cast<Eigen::Index>(unknowns.size());

    Block y = guess;
    Block f(static_cast<std::size_t>(q));
    std::vector<Matrix> jac(unknowns.size());
    Eigen::PartialPivLU<Matrix> lu;
    Vector residual(m * n);

    double previous = std::numeric_limits<double>::infinity();
    int growth_streak = 0;
    bool small_increment = false;

    for (int it = 0;; ++it) {
        for_each_node(unknowns.size(), [&](std::size_t k) {
            const auto j = static_cast<std::size_t>(unknowns[k]);
            f[j] = problem_.f1(t_nodes[j], y[j]);
        });
        stats_.f1_evaluations += m;

        double scale = 1.0;
        for (Eigen::Index a = 0; a < m; ++a) {
            const auto i = static_cast<std::size_t>(unknowns[static_cast<std::size_t>(a)]);
            Vector weighted = Vector::Zero(n);
            for (int j : unknowns)
                if (w(static_cast<Eigen::Index>(i), j) != 0.0)
                    weighted += w(static_cast<Eigen::Index>(i), j) * f[static_cast<std::size_t>(j)];
            weighted *= r;
            residual.segment(a * n, n) = y[i] - rhs_const[i] - weighted;
            scale = std::max({scale, max_abs(y[i]), max_abs(weighted)});
        }
        const double res = max_abs(residual);

        const bool stagnated = res <= kStagnationFactor * cfg_.newton_tol * scale && res >= 0.5 * previous;
        if (it > 0 && (small_increment || stagnated || res == 0.0)) break;
        if (!std::isfinite(res) || res > kDivergenceThreshold)
            throw NewtonDivergence("Newton residual " + std::to_string(res) + " diverged at iteration " +
                                   std::to_string(it));
        growth_streak = res > previous ? growth_streak + 1 : 0;
        if (growth_streak >= kMaxGrowthStreak)
            throw NewtonDivergence("Newton residual grew for " + std::to_string(kMaxGrowthStreak) +
                                   " consecutive iterations (residual " + std::to_string(res) + ")");
        if (it >= cfg_.newton_max_iters)
            throw NewtonDivergence("Newton did not converge in " + std::to_string(cfg_.newton_max_iters) +
                                   " iterations (residual " + std::to_string(res) + ")");
        previous = res;

        if (it == 0 || cfg_.newton_mode == NewtonMode::Full) {
            for_each_node(unknowns.size(), [&](std::size_t k) {
                const auto j = static_cast<std::size_t>(unknowns[k]);
                jac[k] = jacobian_f1(t_nodes[j], y[j]);
            });
            stats_.jacobian_evaluations += m;
            Matrix system = Matrix::Identity(m * n, m * n);
            for (Eigen::Index a = 0; a < m; ++a)
                for (Eigen::Index b = 0; b < m; ++b) {
                    const double wab = w(unknowns[static_cast<std::size_t>(a)], unknowns[static_cast<std::size_t>(b)]);
                    if (wab != 0.0) system.block(a * n, b * n, n, n) -= (r * wab) * jac[static_cast<std::size_t>(b)];
                }
            lu.compute(system);
            const double rcond = lu.rcond();
            if (!(rcond > std::numeric_limits<double>::epsilon()))
                throw LinearSolveFailure("block Jacobian is singular (rcond " + std::to_string(rcond) + ")");
        }

        const Vector delta = lu.solve(-residual);
        ++stats_.newton_iterations;
        double y_scale = 1.0;
        for (Eigen::Index a = 0; a < m; ++a) {
            auto& yi = y[static_cast<std::size_t>(unknowns[static_cast<std::size_t>(a)])];
            yi += delta.segment(a * n, n);
            y_scale = std::max(y_scale, max_abs(yi));
        }
        small_increment = max_abs(delta) <= cfg_.newton_tol * y_scale;
    }

    // Nodes that are not unknowns follow from the converged f1 values.
    std::vector<bool> is_unknown(static_cast<std::size_t>(q), false);
    for (int j : unknowns) is_unknown[static_cast<std::size_t>(j)] = true;
    for (Eigen::Index i = 0; i < q; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        if (is_unknown[ui]) continue;
        y[ui] = rhs_const[ui];
        if (row_is_zero(w, i)) continue;
        Vector weighted = Vector::Zero(n);
        for (int j : unknowns)
            if (w(i, j) != 0.0) weighted += w(i, j) * f[static_cast<std::size_t>(j)];
        y[ui] += r * weighted;
    }
    return y;
}

const Stepper::DiagonalFactors& Stepper::diagonal_factors(const RealMatrix& w, double r, const Vector& diag,
                                                          const std::vector<int>& unknowns)
{
    // Factors depend on r; a new node radius invalidates everything cached.
    if (!diagonal_cache_.empty() && diagonal_cache_.front().r != r) diagonal_cache_.clear();
    for (const auto& entry : diagonal_cache_)
        if (entry.w.rows() == w.rows() && entry.w == w) return entry;

    const auto m = static_cast<Eigen::Index>(unknowns.size());
    Matrix wu(m, m);
    for (Eigen::Index a = 0; a < m; ++a)
        for (Eigen::Index b = 0; b < m; ++b)
            wu(a, b) = w(unknowns[static_cast<std::size_t>(a)], unknowns[static_cast<std::size_t>(b)]);

    DiagonalFactors entry{r, w, unknowns, {}};
    entry.inverses.reserve(static_cast<std::size_t>(diag.size()));
    for (Eigen::Index k = 0; k < diag.size(); ++k) {
        const Matrix system = Matrix::Identity(m, m) - (r * diag[k]) * wu;
        const Eigen::PartialPivLU<Matrix> lu(system);
        if (!(lu.rcond() > std::numeric_limits<double>::epsilon()))
            throw LinearSolveFailure("per-mode implicit system is singular at component " + std::to_string(k));
        entry.inverses.push_back(lu.inverse());
    }
    diagonal_cache_.push_back(std::move(entry));
    return diagonal_cache_.back();
}

Block Stepper::solve_diagonal(const Block& rhs_const, const RealMatrix& w, double r, const Vector& diag,
                              const std::vector<int>& unknowns)
{
    const auto& factors = diagonal_factors(w, r, diag, unknowns);
    const auto q = static_cast<Eigen::Index>(rhs_const.size());
    const Eigen::Index n = problem_.dim;
    const auto m = static_cast<Eigen::Index>(unknowns.size());

    Block y = rhs_const;
    Vector local(m);
    for (Eigen::Index k = 0; k < n; ++k) {
        for (Eigen::Index a = 0; a < m; ++a) local[a] = rhs_const[static_cast<std::size_t>(unknowns[static_cast<std::size_t>(a)])][k];
        const Vector solved = factors.inverses[static_cast<std::size_t>(k)] * local;
        for (Eigen::Index a = 0; a < m; ++a) y[static_cast<std::size_t>(unknowns[static_cast<std::size_t>(a)])][k] = solved[a];
    }

    std::vector<bool> is_unknown(static_cast<std::size_t>(q), false);
    for (int j : unknowns) is_unknown[static_cast<std::size_t>(j)] = true;
    for (Eigen::Index i = 0; i < q; ++i) {
        if (is_unknown[static_cast<std::size_t>(i)] || row_is_zero(w, i)) continue;
        Vector weighted = Vector::Zero(n);
        for (int j : unknowns)
            if (w(i, j) != 0.0) weighted += w(i, j) * diag.cwiseProduct(y[static_cast<std::size_t>(j)]);
        y[static_cast<std::size_t>(i)] += r * weighted;
    }
    return y;
}

BlockState Stepper::propagate(const BlockState& state)
{
    const int q = tableau_.q;
    BlockState in = state;
    if (!in.f2_fresh) refresh_explicit(in);

    BlockState out;
    out.r = in.r;
    out.t_anchor = in.t_anchor + 2.0 * in.r;
    std::vector<double> times(static_cast<std::size_t>(q));
    for (int j = 0; j < q; ++j) times[static_cast<std::size_t>(j)] = node_time(out, j);

    const Block rhs = apply_coefficients(tableau_.A, in.y, tableau_.B2, in.f2, in.r);
    const Block guess(static_cast<std::size_t>(q), in.y.back());
    out.y = solve_block_implicit(rhs, tableau_.B1, times, in.r, guess);

    if (copies_first_node_) evaluate_explicit(out, std::make_pair(0, &in.f2.back()));
    else evaluate_explicit(out, std::nullopt);
    return out;
}

BlockState Stepper::iterate(const BlockState& state)
{
    const int q = tableau_.q;
    BlockState in = state;
    if (!in.f2_fresh) refresh_explicit(in);

    BlockState out;
    out.r = in.r;
    out.t_anchor = in.t_anchor;
    out.iterations_applied = in.iterations_applied + 1;
    std::vector<double> times(static_cast<std::size_t>(q));
    for (int j = 0; j < q; ++j) times[static_cast<std::size_t>(j)] = node_time(out, j);

    const Block rhs = apply_coefficients(tableau_.A_tilde, in.y, tableau_.B_it, in.f2, in.r);
    out.y = solve_block_implicit(rhs, tableau_.B_it, times, in.r, in.y);

    if (copies_first_node_) evaluate_explicit(out, std::make_pair(0, &in.f2.front()));
    else evaluate_explicit(out, std::nullopt);
    return out;
}

BlockState Stepper::start(const Vector& y0, double t0, double r, int kappa_start)
{
    if (!(r > 0.0)) throw InvalidArgument("start: node radius must be positive");
    if (kappa_start < 0) throw InvalidArgument("start: kappa_start must be non-negative");
    if (y0.size() != problem_.dim) throw InvalidArgument("start: initial value has wrong dimension");

    BlockState s;
    s.r = r;
    s.t_anchor = t0 + r;  // node z_1 = -1 sits at t0
    s.y.assign(static_cast<std::size_t>(tableau_.q), y0);
    refresh_explicit(s);
    for (int k = 0; k < kappa_start; ++k) s = iterate(s);
    return s;
}

int default_kappa_start(const MethodSpec& method)
{
    const int minimum = method.variant == Variant::Radau ? method.q - 1 : method.q;
    return std::max(minimum, expected_order(method.variant, method.q, method.kappa));
}

IntegrationResult integrate(const PartitionedProblem& problem, const Vector& y0, const MethodSpec& method, double t0,
                            double t_end, int n_steps, const SolverConfig& cfg, std::optional<int> kappa_start)
{
    if (n_steps < 1) throw InvalidArgument("integrate: n_steps must be >= 1");
    if (!(t_end > t0)) throw InvalidArgument("integrate: t_end must exceed t0");
    if (method.kappa < 0) throw InvalidArgument("integrate: kappa must be non-negative");

    Stepper stepper(build_propagator(method.q, method.variant), problem, cfg);
    const double h = (t_end - t0) / n_steps;
    const double r = 0.5 * h;
    const auto& refresh = stepper.problem().refresh_linearization;

    auto annotated = [](int step, auto&& body) {
        try {
            body();
        } catch (const NewtonDivergence& e) {
            rethrow_with_context(e, "step " + std::to_string(step));
        } catch (const LinearSolveFailure& e) {
            rethrow_with_context(e, "step " + std::to_string(step));
        }
    };

    BlockState state;
    annotated(0, [&] {
        if (refresh) refresh(t0, y0);
        state = stepper.start(y0, t0, r, kappa_start.value_or(default_kappa_start(method)));
    });
    for (int step = 1; step < n_steps; ++step) {
        annotated(step, [&] {
            if (refresh) {
                refresh(stepper.node_time(state, method.q - 1), state.y.back());
                stepper.refresh_explicit(state);
            }
            state = stepper.propagate(state);
            for (int k = 0; k < method.kappa; ++k) state = stepper.iterate(state);
        });
    }

    IntegrationResult result;
    result.y_end = state.y.back();
    result.t_end = stepper.node_time(state, method.q - 1);
    result.h = h;
    result.n_steps = n_steps;
    result.stats = stepper.stats();
    return result;
}

}  // namespace fimex
