// Test-only reference computations, kept independent of the library's
// implementation paths: naive index loops, dense matrix reconstructions,
// finite differences, grid searches and long-run subgradient descent.
#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "tenprox/linop.hpp"
#include "tenprox/tensor.hpp"

namespace oracles {

using tenprox::DenseTensor;
using tenprox::Shape;
using tenprox::TensorIndex;

/// Enumerates all 1-based multi-indices of `shape` with the FIRST index
/// varying fastest (the opposite order of the library's storage).
inline std::vector<TensorIndex> all_indices_first_fastest(const Shape& shape)
{
    std::vector<TensorIndex> out;
    out.reserve(tenprox::shape_size(shape));
    TensorIndex idx;
    idx.coords.assign(shape.size(), 1);
    for (std::size_t count = tenprox::shape_size(shape); count > 0; --count) {
        out.push_back(idx);
        for (std::size_t k = 0; k < shape.size(); ++k) {
            if (++idx.coords[k] <= shape[k]) break;
            idx.coords[k] = 1;
        }
    }
    return out;
}

inline double naive_inner(const DenseTensor& a, const DenseTensor& b)
{
    double s = 0.0;
    for (const auto& idx : all_indices_first_fastest(a.shape()))
        s += a.at(idx) * b.at(idx);
    return s;
}

inline double naive_k_norm(const DenseTensor& x, unsigned k)
{
    double s = 0.0;
    for (const auto& idx : all_indices_first_fastest(x.shape()))
        s += std::pow(std::abs(x.at(idx)), double(k));
    return std::pow(s, 1.0 / double(k));
}

inline double naive_inf_norm(const DenseTensor& x)
{
    double m = 0.0;
    for (const auto& idx : all_indices_first_fastest(x.shape()))
        m = std::max(m, std::abs(x.at(idx)));
    return m;
}

/// Mode-n unfolding built entry by entry from the standard column formula
/// col = sum_{k != n} (i_k - 1) * prod_{m < k, m != n} I_m.
inline Eigen::MatrixXd unfold_by_index_arithmetic(const DenseTensor& x, std::size_t n)
{
    const Shape& shape = x.shape();
    const std::size_t rows = shape[n - 1];
    const std::size_t cols = x.size() / rows;
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(Eigen::Index(rows), Eigen::Index(cols));
    for (const auto& idx : all_indices_first_fastest(shape)) {
        std::size_t col = 0, stride = 1;
        for (std::size_t k = 0; k < shape.size(); ++k) {
            if (k == n - 1) continue;
            col += (idx.coords[k] - 1) * stride;
            stride *= shape[k];
        }
        m(Eigen::Index(idx.coords[n - 1] - 1), Eigen::Index(col)) = x.at(idx);
    }
    return m;
}

/// Nuclear norm summed over all modes, via Jacobi SVD of the oracle's own
/// unfoldings.
inline double nuclear_norm_by_svd(const DenseTensor& x)
{
    double total = 0.0;
    for (std::size_t n = 1; n <= x.order(); ++n) {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(unfold_by_index_arithmetic(x, n));
        total += svd.singularValues().sum();
    }
    return total;
}

/// Naive Einstein contraction with explicit nested multi-index loops.
inline DenseTensor einstein_by_loops(const DenseTensor& a, const DenseTensor& x)
{
    const std::size_t n = a.order() / 2;
    Shape out_shape(a.shape().begin(), a.shape().begin() + n);
    DenseTensor out(out_shape);
    for (const auto& i : all_indices_first_fastest(out_shape)) {
        double s = 0.0;
        for (const auto& j : all_indices_first_fastest(x.shape())) {
            TensorIndex full;
            full.coords = i.coords;
            full.coords.insert(full.coords.end(), j.coords.begin(), j.coords.end());
            s += a.at(full) * x.at(j);
        }
        out.at(i) = s;
    }
    return out;
}

/// Relative adjoint-identity defect |<Ax,p> - <x,A^T p>| / scale.
template <class D>
double adjoint_defect(const tenprox::LinearOperator<D>& op, const DenseTensor& x, const D& p)
{
    const double lhs = inner_product(op.apply(x), p);
    const double rhs = inner_product(x, op.adjoint(p));
    const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-30});
    return std::abs(lhs - rhs) / scale;
}

/// Central-difference directional derivative of f at x along d.
inline double directional_derivative(const std::function<double(const DenseTensor&)>& f,
                                     const DenseTensor& x, const DenseTensor& d, double h = 1e-6)
{
    const DenseTensor xp = tenprox::axpy(h, d, x);
    const DenseTensor xm = tenprox::axpy(-h, d, x);
    return (f(xp) - f(xm)) / (2.0 * h);
}

/// Minimizes |u| + (u - p)^2 / (2 gamma) by scanning a fine grid.
inline double scalar_l1_prox_by_grid(double p, double gamma, double half_width = 4.0,
                                     std::size_t points = 400001)
{
    double best_u = 0.0;
    double best_f = std::abs(best_u) + (best_u - p) * (best_u - p) / (2.0 * gamma);
    const double lo = p - half_width, hi = p + half_width;
    for (std::size_t i = 0; i < points; ++i) {
        const double u = lo + (hi - lo) * double(i) / double(points - 1);
        const double f = std::abs(u) + (u - p) * (u - p) / (2.0 * gamma);
        if (f < best_f) {
            best_f = f;
            best_u = u;
        }
    }
    return best_u;
}

/// Long-run subgradient descent on
///   mu * sum_i |u_{i+1} - u_i| + ||u - y||^2 / (2 alpha)
/// for a 1-D signal; returns the best iterate found.
inline std::vector<double> tv1d_prox_by_subgradient(const std::vector<double>& y, double alpha,
                                                    double mu, std::size_t iterations = 2000000)
{
    const std::size_t n = y.size();
    std::vector<double> u = y, best = y, grad(n);
    auto objective = [&](const std::vector<double>& v) {
        double f = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i) f += mu * std::abs(v[i + 1] - v[i]);
        for (std::size_t i = 0; i < n; ++i) f += (v[i] - y[i]) * (v[i] - y[i]) / (2.0 * alpha);
        return f;
    };
    double best_f = objective(best);
    for (std::size_t it = 1; it <= iterations; ++it) {
        std::fill(grad.begin(), grad.end(), 0.0);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const double d = u[i + 1] - u[i];
            const double s = (d > 0.0) ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
            grad[i + 1] += mu * s;
            grad[i] -= mu * s;
        }
        for (std::size_t i = 0; i < n; ++i) grad[i] += (u[i] - y[i]) / alpha;
        const double step = 0.5 / std::sqrt(double(it));
        for (std::size_t i = 0; i < n; ++i) u[i] -= step * grad[i];
        const double f = objective(u);
        if (f < best_f) {
            best_f = f;
            best = u;
        }
    }
    return best;
}

/// Dense matrix of adjoint(apply(.)) assembled column by column.
template <class D>
Eigen::MatrixXd normal_matrix(const tenprox::LinearOperator<D>& op)
{
    const std::size_t n = tenprox::shape_size(op.domain_shape);
    Eigen::MatrixXd m(Eigen::Index(n), Eigen::Index(n));
    for (std::size_t j = 0; j < n; ++j) {
        DenseTensor e(op.domain_shape);
        e[j] = 1.0;
        const DenseTensor col = op.adjoint(op.apply(e));
        for (std::size_t i = 0; i < n; ++i) m(Eigen::Index(i), Eigen::Index(j)) = col[i];
    }
    return m;
}

/// Scalar sequence s_n = limit + sum_i coeff_i * ratio_i^n.
inline double aitken_delta_squared(double s0, double s1, double s2)
{
    const double d0 = s1 - s0, d1 = s2 - s1;
    return s0 - d0 * d0 / (d1 - d0);
}

/// Builds S_n = limit + sum_i ratios[i]^n * terms[i], n = 0..count-1.
inline std::vector<DenseTensor> geometric_kernel_sequence(const DenseTensor& limit,
                                                          const std::vector<double>& ratios,
                                                          const std::vector<DenseTensor>& terms,
                                                          std::size_t count)
{
    std::vector<DenseTensor> seq;
    seq.reserve(count);
    for (std::size_t n = 0; n < count; ++n) {
        DenseTensor s = limit;
        for (std::size_t i = 0; i < ratios.size(); ++i)
            s = tenprox::axpy(std::pow(ratios[i], double(n)), terms[i], s);
        seq.push_back(std::move(s));
    }
    return seq;
}

} // namespace oracles
