#pragma once

#include <chrono>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "tenprox/prox.hpp"

namespace tenprox {

enum class OmegaKind { WholeSpace, Box, NuclearBall };

/// Closed convex feasible set with its orthogonal projection. The nuclear
/// ball constrains the nuclear norm of a single mode unfolding; its
/// projection thresholds the spectrum of that unfolding onto the l1 ball.
struct ConstraintSet {
    OmegaKind kind = OmegaKind::WholeSpace;
    double lo = 0.0;
    double hi = 1.0;
    double epsilon = 0.0;
    std::size_t mode = 1;

    DenseTensor project(const DenseTensor& x) const;

    static ConstraintSet whole_space();
    static ConstraintSet box(double lo, double hi);
    static ConstraintSet nuclear_ball(double epsilon, std::size_t mode = 1);
};

/// Entrywise clamp to [lo, hi].
DenseTensor project_box(const DenseTensor& x, double lo, double hi);

/// Frobenius projection onto {X : ||unfold_mode(X)||_* <= epsilon}. Inputs
/// already inside the ball are returned unchanged; otherwise the singular
/// values of the unfolding are projected onto the simplex of radius epsilon
/// and the matrix is rebuilt and refolded.
DenseTensor project_nuclear_ball(const DenseTensor& x, double epsilon, std::size_t mode);

/// One instance of  min_{X in Omega} 1/2 ||F(X) - B||_F^2 + mu * phi(L(X)).
template <TensorLike D>
struct ProblemSpec {
    TensorOperator F;
    DenseTensor b;
    LinearOperator<D> L;
    ProxFunction<D> phi;
    double mu = 0.0;
    ConstraintSet omega;
};

struct SolverConfig {
    double alpha = 0.0;            // <= 0 selects 0.95 / (safety * ||F^T o F||_est)
    double lipschitz_safety = 2.0; // factor in the admissible step bound
    InnerLoopConfig inner;
    double tol = 1e-3;   // stop when ||X_{k+1}-X_k|| / ||X_k|| < tol
    int max_outer = 500;
    bool warm_start_dual = true;    // reuse the dual across outer iterations
    bool gradient_adjoint = true;   // false: grad f = F(X) - B, no adjoint
    std::function<double(const DenseTensor&)> progress_metric; // recorded per iteration
    std::function<void(int, const DenseTensor&)> on_iterate;   // diagnostics hook

    void validate() const;
};

struct IterationRecord {
    double objective = 0.0;
    double data_fit = 0.0;
    double regularizer = 0.0;
    double rel_change = 0.0;
    double elapsed_s = 0.0;
    double metric = 0.0;
    bool has_metric = false;
};

enum class StopReason { Tolerance, IterationCap };

struct SolveReport {
    int iterates_used = 0; // outer iterations; total base iterations for accelerated runs
    int cycles = 0;        // restart cycles; 0 for plain runs
    DenseTensor final;
    std::vector<IterationRecord> history;
    StopReason stopped_by = StopReason::IterationCap;
    std::vector<std::string> warnings;
};

/// Objective exceeded 1000x its starting value; carries the partial run.
class DivergenceError : public NumericalError {
public:
    DivergenceError(const std::string& what, SolveReport partial)
        : NumericalError(what), report(std::move(partial))
    {
    }
    SolveReport report;
};

/// F^T(F(x) - B), or F(x) - B when use_adjoint is false.
template <TensorLike D>
DenseTensor grad_f(const DenseTensor& x, const ProblemSpec<D>& spec, bool use_adjoint = true)
{
    DenseTensor residual = spec.F.apply(x);
    residual -= spec.b;
    return use_adjoint ? spec.F.adjoint(residual) : residual;
}

/// 1/2 ||F(x) - B||_F^2.
template <TensorLike D>
double data_fit_value(const DenseTensor& x, const ProblemSpec<D>& spec)
{
    DenseTensor residual = spec.F.apply(x);
    residual -= spec.b;
    const double n = frobenius_norm(residual);
    return 0.5 * n * n;
}

/// 1/2 ||F(x) - B||_F^2 + mu * phi(L(x)).
template <TensorLike D>
double objective(const DenseTensor& x, const ProblemSpec<D>& spec)
{
    return data_fit_value(x, spec) + phi_value(x, spec.L, spec.phi, spec.mu);
}

/// Self-adjoint operator x -> F^T(F(x)).
TensorOperator normal_operator(const TensorOperator& f);

/// Step size strictly inside (0, 1/(safety * ||F^T o F||)):
/// 0.95 / (safety * estimate). An unconverged norm estimate is reported
/// through `warnings` and still used.
template <TensorLike D>
double choose_alpha(const ProblemSpec<D>& spec, double safety = 2.0, double tol = 1e-8,
                    std::vector<std::string>* warnings = nullptr)
{
    if (safety < 1.0)
        throw ParameterError("choose_alpha: safety must be >= 1");
    const NormEstimate est = operator_norm_estimate(normal_operator(spec.F), tol);
    if (!est.converged && warnings != nullptr)
        warnings->push_back("choose_alpha: operator norm estimate unconverged after " +
                            std::to_string(est.iterations) + " iterations");
    if (est.value <= 0.0)
        throw ParameterError("choose_alpha: estimated operator norm is zero");
    return 0.95 / (safety * est.value);
}

/// Corrected projection step:
///   Q = z - alpha * grad f(z),  X_next = Pi_Omega(x - y + Q).
template <TensorLike D>
DenseTensor tseng_step(const DenseTensor& x, const DenseTensor& y, const DenseTensor& z,
                       double alpha, const ProblemSpec<D>& spec, bool use_adjoint = true)
{
    const DenseTensor q = axpy(-alpha, grad_f(z, spec, use_adjoint), z);
    DenseTensor arg = x;
    arg -= y;
    arg += q;
    return spec.omega.project(arg);
}

/// The outer iteration, reusable both by the plain solvers and by the
/// restarted accelerators (which need raw iterate windows). Resolves the
/// step size and inner schedule once and keeps the warm-started dual.
template <TensorLike D>
class GtpgEngine {
public:
    GtpgEngine(ProblemSpec<D> spec, SolverConfig cfg)
        : spec_(std::move(spec)), cfg_(std::move(cfg))
    {
        cfg_.validate();
        if (spec_.mu < 0.0)
            throw ParameterError("GtpgEngine: mu must be nonnegative");
        if (spec_.F.domain_shape != spec_.L.domain_shape)
            throw DimensionError("GtpgEngine: F and L domain shapes differ");

        const NormEstimate est = operator_norm_estimate(normal_operator(spec_.F));
        if (!est.converged)
            warnings_.push_back("operator norm estimate unconverged after " +
                                std::to_string(est.iterations) + " iterations");
        const double bound = 1.0 / (cfg_.lipschitz_safety * est.value);
        if (cfg_.alpha > 0.0) {
            if (cfg_.alpha >= bound)
                throw ParameterError("GtpgEngine: alpha must be below " + std::to_string(bound));
            alpha_ = cfg_.alpha;
        } else {
            alpha_ = 0.95 * bound;
        }

        inner_ = cfg_.inner;
        if (spec_.mu > 0.0) {
            if (inner_.beta0 <= 0.0)
                inner_.beta0 = default_beta0(alpha_, spec_.L);
            dual_ = make_zero_dual();
        }
    }

    /// One outer iteration from x.
    DenseTensor step(const DenseTensor& x)
    {
        const DenseTensor y = axpy(-alpha_, grad_f(x, spec_, cfg_.gradient_adjoint), x);
        const DenseTensor z =
            (spec_.mu > 0.0)
                ? dual_prox_solve(y, alpha_, spec_.L, spec_.phi, spec_.mu, inner_,
                                  cfg_.warm_start_dual ? &dual_ : nullptr)
                : y;
        return tseng_step(x, y, z, alpha_, spec_, cfg_.gradient_adjoint);
    }

    /// `count` successive iterates starting after `start`.
    std::vector<DenseTensor> run(const DenseTensor& start, int count)
    {
        std::vector<DenseTensor> out;
        out.reserve(static_cast<std::size_t>(count));
        DenseTensor x = start;
        for (int i = 0; i < count; ++i) {
            x = step(x);
            out.push_back(x);
        }
        return out;
    }

    double objective_value(const DenseTensor& x) const { return objective(x, spec_); }
    double data_fit(const DenseTensor& x) const { return data_fit_value(x, spec_); }
    double regularizer(const DenseTensor& x) const
    {
        return phi_value(x, spec_.L, spec_.phi, spec_.mu);
    }
    DenseTensor project(const DenseTensor& x) const { return spec_.omega.project(x); }

    double alpha() const { return alpha_; }
    const SolverConfig& config() const { return cfg_; }
    const ProblemSpec<D>& problem() const { return spec_; }
    const std::vector<std::string>& warnings() const { return warnings_; }
    void reset_dual()
    {
        if (spec_.mu > 0.0) dual_ = make_zero_dual();
    }

private:
    D make_zero_dual() const
    {
        if constexpr (std::is_same_v<D, GradientField>)
            return zero_field(spec_.L.codomain_shape);
        else
            return DenseTensor::zeros(spec_.L.codomain_shape);
    }

    ProblemSpec<D> spec_;
    SolverConfig cfg_;
    double alpha_ = 0.0;
    InnerLoopConfig inner_;
    D dual_{};
    std::vector<std::string> warnings_;
};

/// Relative change ||a - b||_F / ||b||_F with a zero-denominator guard.
double relative_change(const DenseTensor& next, const DenseTensor& prev);

/// Runs the full double proximal gradient iteration
///   Y_k = X_k - alpha grad f(X_k)
///   Z_k ~ prox_{alpha phi_mu}(Y_k)        (inner dual loop)
///   X_{k+1} = Pi_Omega(X_k - Y_k + Z_k - alpha grad f(Z_k))
/// until the relative change drops below cfg.tol or max_outer is reached.
template <TensorLike D>
SolveReport gtpg_solve(const ProblemSpec<D>& spec, const SolverConfig& cfg, const DenseTensor& x0)
{
    GtpgEngine<D> engine(spec, cfg);
    SolveReport report;
    report.warnings = engine.warnings();

    const double obj0 = engine.objective_value(x0);
    const auto t0 = std::chrono::steady_clock::now();

    DenseTensor x = x0;
    for (int k = 1; k <= cfg.max_outer; ++k) {
        const DenseTensor next = engine.step(x);

        IterationRecord rec;
        rec.objective = engine.objective_value(next);
        rec.data_fit = engine.data_fit(next);
        rec.regularizer = engine.regularizer(next);
        rec.rel_change = relative_change(next, x);
        rec.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (cfg.progress_metric) {
            rec.metric = cfg.progress_metric(next);
            rec.has_metric = true;
        }
        report.history.push_back(rec);
        report.iterates_used = k;
        if (cfg.on_iterate)
            cfg.on_iterate(k, next);

        x = next;
        if (obj0 > 0.0 && rec.objective > 1e3 * obj0) {
            report.final = x;
            throw DivergenceError("gtpg_solve: objective exceeded 1000x its initial value at outer iteration " +
                                      std::to_string(k),
                                  std::move(report));
        }
        if (rec.rel_change < cfg.tol) {
            report.stopped_by = StopReason::Tolerance;
            break;
        }
    }
    report.final = std::move(x);
    return report;
}

/// l1-regularized specialization (L = id, phi = ||.||_1).
SolveReport tista_solve(const TensorOperator& F, const DenseTensor& b, double mu,
                        const ConstraintSet& omega, const SolverConfig& cfg,
                        const DenseTensor& x0);

/// tista_solve with F the Einstein-product operator of an order-2N tensor.
SolveReport eista_solve(const DenseTensor& a, const DenseTensor& b, double mu,
                        const ConstraintSet& omega, const SolverConfig& cfg,
                        const DenseTensor& x0);

/// Total-variation specialization (L = gradient, phi = ||.||_1 on fields).
SolveReport tdpg_solve(const TensorOperator& F, const DenseTensor& b, double mu,
                       const ConstraintSet& omega, const SolverConfig& cfg,
                       const DenseTensor& x0);

/// Problem builders used by the specialized solvers and the experiment
/// harness.
ProblemSpec<DenseTensor> make_l1_problem(const TensorOperator& F, const DenseTensor& b, double mu,
                                         const ConstraintSet& omega);
ProblemSpec<GradientField> make_tv_problem(const TensorOperator& F, const DenseTensor& b,
                                           double mu, const ConstraintSet& omega);

} // namespace tenprox
