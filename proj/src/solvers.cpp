#include "tenprox/solvers.hpp"

#include <cmath>
#include <limits>

#include <Eigen/SVD>

namespace tenprox {

DenseTensor project_box(const DenseTensor& x, double lo, double hi)
{
    if (lo > hi)
        throw ParameterError("project_box: lo must not exceed hi");
    DenseTensor out = x;
    for (double& v : out.data())
        v = std::min(hi, std::max(lo, v));
    return out;
}

namespace {

// Projection of a descending nonnegative vector onto the simplex
// {s >= 0, sum s = radius}: s_i -> max(s_i - tau, 0).
Eigen::VectorXd simplex_threshold(const Eigen::VectorXd& sv, double radius)
{
    const Eigen::Index n = sv.size();
    double cumulative = 0.0;
    double tau = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        cumulative += sv(j);
        const double t = (cumulative - radius) / double(j + 1);
        if (sv(j) - t > 0.0)
            tau = t;
    }
    return (sv.array() - tau).max(0.0).matrix();
}

} // namespace

DenseTensor project_nuclear_ball(const DenseTensor& x, double epsilon, std::size_t mode)
{
    if (epsilon <= 0.0)
        throw ParameterError("project_nuclear_ball: epsilon must be positive");
    const Eigen::MatrixXd m = mode_n_unfold(x, mode);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success)
        throw NumericalError("project_nuclear_ball: SVD did not converge");
    const Eigen::VectorXd& sv = svd.singularValues();
    if (sv.sum() <= epsilon)
        return x;
    const Eigen::VectorXd shrunk = simplex_threshold(sv, epsilon);
    const Eigen::MatrixXd projected =
        svd.matrixU() * shrunk.asDiagonal() * svd.matrixV().transpose();
    return mode_n_fold(projected, mode, x.shape());
}

DenseTensor ConstraintSet::project(const DenseTensor& x) const
{
    switch (kind) {
    case OmegaKind::WholeSpace:
        return x;
    case OmegaKind::Box:
        return project_box(x, lo, hi);
    case OmegaKind::NuclearBall:
        return project_nuclear_ball(x, epsilon, mode);
    }
    throw ParameterError("ConstraintSet: unknown kind");
}

ConstraintSet ConstraintSet::whole_space()
{
    return {};
}

ConstraintSet ConstraintSet::box(double lo, double hi)
{
    if (lo > hi)
        throw ParameterError("ConstraintSet::box: lo must not exceed hi");
    ConstraintSet c;
    c.kind = OmegaKind::Box;
    c.lo = lo;
    c.hi = hi;
    return c;
}

ConstraintSet ConstraintSet::nuclear_ball(double epsilon, std::size_t mode)
{
    if (epsilon <= 0.0)
        throw ParameterError("ConstraintSet::nuclear_ball: epsilon must be positive");
    ConstraintSet c;
    c.kind = OmegaKind::NuclearBall;
    c.epsilon = epsilon;
    c.mode = mode;
    return c;
}

void SolverConfig::validate() const
{
    inner.validate();
    if (tol <= 0.0)
        throw ParameterError("SolverConfig: tol must be positive");
    if (max_outer < 1)
        throw ParameterError("SolverConfig: max_outer must be >= 1");
    if (lipschitz_safety < 1.0)
        throw ParameterError("SolverConfig: lipschitz_safety must be >= 1");
}

TensorOperator normal_operator(const TensorOperator& f)
{
    TensorOperator op;
    op.domain_shape = f.domain_shape;
    op.codomain_shape = f.domain_shape;
    op.apply = [f](const DenseTensor& x) { return f.adjoint(f.apply(x)); };
    op.adjoint = op.apply; // self-adjoint
    return op;
}

double relative_change(const DenseTensor& next, const DenseTensor& prev)
{
    DenseTensor diff = next;
    diff -= prev;
    const double num = frobenius_norm(diff);
    const double den = frobenius_norm(prev);
    if (den == 0.0)
        return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return num / den;
}

ProblemSpec<DenseTensor> make_l1_problem(const TensorOperator& F, const DenseTensor& b, double mu,
                                         const ConstraintSet& omega)
{
    ProblemSpec<DenseTensor> spec;
    spec.F = F;
    spec.b = b;
    spec.L = identity_op(F.domain_shape);
    spec.phi = l1_norm_prox<DenseTensor>();
    spec.mu = mu;
    spec.omega = omega;
    return spec;
}

ProblemSpec<GradientField> make_tv_problem(const TensorOperator& F, const DenseTensor& b,
                                           double mu, const ConstraintSet& omega)
{
    ProblemSpec<GradientField> spec;
    spec.F = F;
    spec.b = b;
    spec.L = gradient_op(F.domain_shape);
    spec.phi = l1_norm_prox<GradientField>();
    spec.mu = mu;
    spec.omega = omega;
    return spec;
}

SolveReport tista_solve(const TensorOperator& F, const DenseTensor& b, double mu,
                        const ConstraintSet& omega, const SolverConfig& cfg,
                        const DenseTensor& x0)
{
    return gtpg_solve(make_l1_problem(F, b, mu, omega), cfg, x0);
}

SolveReport eista_solve(const DenseTensor& a, const DenseTensor& b, double mu,
                        const ConstraintSet& omega, const SolverConfig& cfg,
                        const DenseTensor& x0)
{
    return tista_solve(einstein_op(a), b, mu, omega, cfg, x0);
}

SolveReport tdpg_solve(const TensorOperator& F, const DenseTensor& b, double mu,
                       const ConstraintSet& omega, const SolverConfig& cfg,
                       const DenseTensor& x0)
{
    return gtpg_solve(make_tv_problem(F, b, mu, omega), cfg, x0);
}

} // namespace tenprox
