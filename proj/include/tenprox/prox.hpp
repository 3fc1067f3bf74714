#pragma once

#include <functional>
#include <string>

#include "tenprox/linop.hpp"
#include "tenprox/tensor.hpp"

namespace tenprox {

/// A convex function phi together with its proximal map
/// prox(y, gamma) = argmin_u phi(u) + (1/(2 gamma)) ||u - y||_F^2.
template <TensorLike T>
struct ProxFunction {
    std::function<double(const T&)> value;
    std::function<T(const T&, double)> prox;
};

/// Entrywise shrink toward zero by gamma: the closed-form prox of
/// gamma * ||.||_1. gamma = 0 is the identity.
DenseTensor soft_threshold(const DenseTensor& p, double gamma);
GradientField soft_threshold(const GradientField& p, double gamma);

double l1_value(const DenseTensor& x);
double l1_value(const GradientField& x);

/// phi = ||.||_1 with its soft-threshold prox, on tensors or fields.
template <TensorLike T>
ProxFunction<T> l1_norm_prox()
{
    ProxFunction<T> phi;
    phi.value = [](const T& x) { return l1_value(x); };
    phi.prox = [](const T& p, double gamma) { return soft_threshold(p, gamma); };
    return phi;
}

/// Which expression evaluates the prox of the dual penalty
/// J(P) = (mu phi)^*(-P). The two conventions differ by an overall sign.
enum class DualSign {
    Alg,  // P + beta * prox_{(mu/beta) phi}(-P / beta), the descent form
    Proof // its negation
};

/// Step-size schedule and budget of the inner dual loop:
/// beta_l = rho * beta_{l-1}, l = 1..max_inner, starting from beta0.
/// beta0 = 0 selects 1 / (alpha * max(1, ||L L^T||_est)).
struct InnerLoopConfig {
    int max_inner = 10;
    double beta0 = 0.0;
    double rho = 0.99;
    DualSign dual_sign = DualSign::Alg;

    void validate() const
    {
        if (max_inner < 1)
            throw ParameterError("InnerLoopConfig: max_inner must be >= 1");
        if (beta0 < 0.0)
            throw ParameterError("InnerLoopConfig: beta0 must be positive (or 0 for auto)");
        if (!(rho > 0.0 && rho < 1.0))
            throw ParameterError("InnerLoopConfig: rho must lie strictly inside (0,1)");
    }
};

/// Exact prox of beta * J where J(P) = (mu phi)^*(-P), via the Moreau
/// identity applied to the scaled function:
///   prox_{beta J}(P) = P + beta * prox_{(mu/beta) phi}(-P / beta).
/// At beta = 1 this is P + prox_{mu phi}(-P). For mu = 0 the conjugate is
/// the indicator of {0}, so the result is exactly the zero element.
template <TensorLike D>
D prox_of_J(const D& p, double beta, const ProxFunction<D>& phi, double mu,
            DualSign sign = DualSign::Alg)
{
    if (beta <= 0.0)
        throw ParameterError("prox_of_J: beta must be positive");
    if (mu < 0.0)
        throw ParameterError("prox_of_J: mu must be nonnegative");
    if (mu == 0.0)
        return zero_like(p);
    const D shrunk = phi.prox(scale(-1.0 / beta, p), mu / beta);
    D out = axpy(beta, shrunk, p);
    if (sign == DualSign::Proof)
        out = scale(-1.0, out);
    return out;
}

/// Gradient of the smooth dual term N(P) = <(alpha/2) L(L^T P) + L(y) | P>:
/// alpha * L(L^T(P)) + L(y).
template <TensorLike D>
D grad_N(const D& p, double alpha, const LinearOperator<D>& L, const DenseTensor& y)
{
    const D llt = L.apply(L.adjoint(p));
    return axpy(alpha, llt, L.apply(y));
}

/// Default beta0: 1 / (alpha * max(1, ||L o L^T||)), estimated by power
/// iteration on L.
template <TensorLike D>
double default_beta0(double alpha, const LinearOperator<D>& L)
{
    const NormEstimate est = operator_norm_estimate(L);
    return 1.0 / (alpha * std::max(1.0, est.value * est.value));
}

/// Approximates prox_{alpha phi_mu}(y) for phi_mu = mu * phi o L by
/// proximal gradient on the dual problem
///   min_P (mu phi)^*(-P) + <(alpha/2) L(L^T P) + L(y) | P>,
/// running max_inner iterations
///   R_l = P_l - beta_l * (alpha L(L^T P_l) + L(y)),  P_{l+1} = prox_{beta_l J}(R_l)
/// and returning Z = y + alpha * L^T(P_final). The dual start is zero
/// unless warm_dual points at a previous dual iterate; on return the final
/// dual is written back through warm_dual for reuse.
template <TensorLike D>
DenseTensor dual_prox_solve(const DenseTensor& y, double alpha, const LinearOperator<D>& L,
                            const ProxFunction<D>& phi, double mu, const InnerLoopConfig& cfg,
                            D* warm_dual = nullptr)
{
    cfg.validate();
    if (alpha <= 0.0)
        throw ParameterError("dual_prox_solve: alpha must be positive");
    if (mu < 0.0)
        throw ParameterError("dual_prox_solve: mu must be nonnegative");
    if (mu == 0.0)
        return y; // zero dual is the fixed point

    D p = (warm_dual != nullptr) ? *warm_dual
                                 : [&] {
                                       if constexpr (std::is_same_v<D, GradientField>)
                                           return zero_field(L.codomain_shape);
                                       else
                                           return DenseTensor::zeros(L.codomain_shape);
                                   }();

    const D ly = L.apply(y); // loop invariant
    double beta = (cfg.beta0 > 0.0) ? cfg.beta0 : default_beta0(alpha, L);
    for (int l = 1; l <= cfg.max_inner; ++l) {
        beta *= cfg.rho;
        const D llt = L.apply(L.adjoint(p));
        const D grad = axpy(alpha, llt, ly);
        const D r = axpy(-beta, grad, p);
        p = prox_of_J(r, beta, phi, mu, cfg.dual_sign);
        if (!all_finite(p))
            throw NumericalError("dual_prox_solve: non-finite dual iterate at inner iteration " +
                                 std::to_string(l));
    }
    if (warm_dual != nullptr)
        *warm_dual = p;
    return axpy(alpha, L.adjoint(p), y);
}

/// mu * phi(L(x)); 0 when mu = 0.
template <TensorLike D>
double phi_value(const DenseTensor& x, const LinearOperator<D>& L, const ProxFunction<D>& phi,
                 double mu)
{
    if (mu == 0.0) return 0.0;
    return mu * phi.value(L.apply(x));
}

} // namespace tenprox
