#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "tenprox/tensor.hpp"

namespace tenprox {

/// Stacked forward-difference blocks, one per mode, each congruent to the
/// source tensor. Block n is zero on the last slice of mode n. Also the
/// value type of the dual variable in the total-variation inner loop.
struct GradientField {
    std::vector<DenseTensor> blocks;
};

GradientField zero_field(const Shape& base_shape);
bool same_shape(const GradientField& a, const GradientField& b);
double inner_product(const GradientField& a, const GradientField& b);
GradientField axpy(double alpha, const GradientField& x, const GradientField& y);
GradientField zero_like(const GradientField& x);
GradientField scale(double c, const GradientField& x);
double frobenius_norm(const GradientField& x);
bool all_finite(const GradientField& x);

/// Values an algorithm can treat as points of an inner-product space:
/// plain tensors and gradient fields.
template <class T>
concept TensorLike = requires(const T& a, const T& b, double c) {
    { inner_product(a, b) } -> std::convertible_to<double>;
    { axpy(c, a, b) } -> std::convertible_to<T>;
    { zero_like(a) } -> std::convertible_to<T>;
    { scale(c, a) } -> std::convertible_to<T>;
    { all_finite(a) } -> std::convertible_to<bool>;
};

/// Set of observed entries of a tensor (1 = observed). At least one entry
/// must be observed.
struct ObservedSet {
    Shape shape;
    std::vector<std::uint8_t> mask;

    std::size_t observed_count() const;
    void validate() const;
};

/// Linear map from tensors into a TensorLike codomain, with its adjoint.
/// apply and adjoint are pure; operators are immutable once built.
template <TensorLike D>
struct LinearOperator {
    Shape domain_shape;
    Shape codomain_shape; // block shape when D is a GradientField
    std::function<D(const DenseTensor&)> apply;
    std::function<DenseTensor(const D&)> adjoint;
};

using TensorOperator = LinearOperator<DenseTensor>;
using FieldOperator = LinearOperator<GradientField>;

TensorOperator identity_op(const Shape& shape);

/// Projection onto the observed entries: keeps observed, zeroes the rest.
/// Self-adjoint and idempotent.
TensorOperator mask_op(const ObservedSet& observed);

/// apply(x) = a *_N x for an order-2N tensor a; the adjoint contracts with
/// the index groups swapped.
TensorOperator einstein_op(const DenseTensor& a);

/// Forward differences along every mode, zero at the last slice of each
/// mode; the adjoint is the exact transpose of that map (a negative
/// divergence with one-sided boundary rows).
FieldOperator gradient_op(const Shape& shape);

/// apply = outer.apply o inner.apply, adjoint in the reverse order.
TensorOperator compose(const TensorOperator& outer, const TensorOperator& inner);

struct NormEstimate {
    double value = 0.0; // estimated operator norm, sqrt of lambda_max(A^T A)
    bool converged = false;
    int iterations = 0;
};

inline constexpr std::uint64_t kNormEstimateSeed = 0x5eed0f01;

/// Power iteration on adjoint(apply(.)) from a seeded uniform start;
/// stops when successive Rayleigh quotients agree to a relative tol.
/// Exhausting max_iter returns the best estimate flagged unconverged.
template <TensorLike D>
NormEstimate operator_norm_estimate(const LinearOperator<D>& op, double tol = 1e-8,
                                    int max_iter = 500,
                                    std::uint64_t seed = kNormEstimateSeed)
{
    if (tol <= 0.0)
        throw ParameterError("operator_norm_estimate: tol must be positive");
    if (max_iter < 1)
        throw ParameterError("operator_norm_estimate: max_iter must be >= 1");

    Rng rng(seed);
    DenseTensor v = random_uniform(op.domain_shape, rng, -1.0, 1.0);
    double nv = frobenius_norm(v);
    if (nv == 0.0) return {0.0, true, 0};
    v *= 1.0 / nv;

    double lambda = 0.0;
    for (int it = 1; it <= max_iter; ++it) {
        const DenseTensor w = op.adjoint(op.apply(v));
        const double lambda_next = inner_product(v, w); // Rayleigh quotient, v is unit
        const double nw = frobenius_norm(w);
        if (nw == 0.0)
            return {0.0, true, it};
        const bool settled =
            it > 1 && std::abs(lambda_next - lambda) <= tol * std::max(std::abs(lambda_next), 1e-300);
        lambda = lambda_next;
        if (settled)
            return {std::sqrt(std::max(lambda, 0.0)), true, it};
        v = scale(1.0 / nw, w);
    }
    return {std::sqrt(std::max(lambda, 0.0)), false, max_iter};
}

} // namespace tenprox
