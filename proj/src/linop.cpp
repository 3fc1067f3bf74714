#include "tenprox/linop.hpp"

#include <cmath>

namespace tenprox {

GradientField zero_field(const Shape& base_shape)
{
    GradientField f;
    f.blocks.reserve(base_shape.size());
    for (std::size_t n = 0; n < base_shape.size(); ++n)
        f.blocks.emplace_back(base_shape);
    return f;
}

bool same_shape(const GradientField& a, const GradientField& b)
{
    if (a.blocks.size() != b.blocks.size()) return false;
    for (std::size_t n = 0; n < a.blocks.size(); ++n)
        if (!same_shape(a.blocks[n], b.blocks[n])) return false;
    return true;
}

double inner_product(const GradientField& a, const GradientField& b)
{
    if (a.blocks.size() != b.blocks.size())
        throw DimensionError("GradientField inner_product: block count mismatch");
    double s = 0.0;
    for (std::size_t n = 0; n < a.blocks.size(); ++n)
        s += inner_product(a.blocks[n], b.blocks[n]);
    return s;
}

GradientField axpy(double alpha, const GradientField& x, const GradientField& y)
{
    if (x.blocks.size() != y.blocks.size())
        throw DimensionError("GradientField axpy: block count mismatch");
    GradientField out;
    out.blocks.reserve(x.blocks.size());
    for (std::size_t n = 0; n < x.blocks.size(); ++n)
        out.blocks.push_back(axpy(alpha, x.blocks[n], y.blocks[n]));
    return out;
}

GradientField zero_like(const GradientField& x)
{
    GradientField out;
    out.blocks.reserve(x.blocks.size());
    for (const auto& b : x.blocks)
        out.blocks.push_back(zero_like(b));
    return out;
}

GradientField scale(double c, const GradientField& x)
{
    GradientField out = x;
    for (auto& b : out.blocks) b *= c;
    return out;
}

double frobenius_norm(const GradientField& x)
{
    return std::sqrt(inner_product(x, x));
}

bool all_finite(const GradientField& x)
{
    for (const auto& b : x.blocks)
        if (!all_finite(b)) return false;
    return true;
}

std::size_t ObservedSet::observed_count() const
{
    std::size_t c = 0;
    for (auto m : mask) c += (m != 0);
    return c;
}

void ObservedSet::validate() const
{
    if (mask.size() != shape_size(shape))
        throw DimensionError("ObservedSet: mask length does not match shape " +
                             shape_to_string(shape));
    if (observed_count() == 0)
        throw ParameterError("ObservedSet: at least one entry must be observed");
}

TensorOperator identity_op(const Shape& shape)
{
    TensorOperator op;
    op.domain_shape = shape;
    op.codomain_shape = shape;
    op.apply = [](const DenseTensor& x) { return x; };
    op.adjoint = [](const DenseTensor& p) { return p; };
    return op;
}

TensorOperator mask_op(const ObservedSet& observed)
{
    observed.validate();
    TensorOperator op;
    op.domain_shape = observed.shape;
    op.codomain_shape = observed.shape;
    auto project = [observed](const DenseTensor& x) {
        if (x.shape() != observed.shape)
            throw DimensionError("mask_op: operand shape " + shape_to_string(x.shape()) +
                                 " does not match mask shape " + shape_to_string(observed.shape));
        DenseTensor out = x;
        auto d = out.data();
        for (std::size_t i = 0; i < d.size(); ++i)
            if (!observed.mask[i]) d[i] = 0.0;
        return out;
    };
    op.apply = project;
    op.adjoint = project; // orthogonal projection
    return op;
}

TensorOperator einstein_op(const DenseTensor& a)
{
    if (a.order() % 2 != 0)
        throw DimensionError("einstein_op: tensor must have even order");
    const std::size_t n = a.order() / 2;
    Shape out_shape(a.shape().begin(), a.shape().begin() + n);
    Shape in_shape(a.shape().begin() + n, a.shape().end());

    TensorOperator op;
    op.domain_shape = in_shape;
    op.codomain_shape = out_shape;
    op.apply = [a](const DenseTensor& x) { return einstein_product(a, x); };
    op.adjoint = [a, out_shape, in_shape](const DenseTensor& p) {
        if (p.shape() != out_shape)
            throw DimensionError("einstein_op adjoint: operand shape mismatch");
        const std::size_t rows = shape_size(out_shape);
        const std::size_t cols = shape_size(in_shape);
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
            amat(a.data().data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        Eigen::Map<const Eigen::VectorXd> pvec(p.data().data(), static_cast<Eigen::Index>(rows));
        DenseTensor out(in_shape);
        Eigen::Map<Eigen::VectorXd> ovec(out.data().data(), static_cast<Eigen::Index>(cols));
        ovec = amat.transpose() * pvec;
        return out;
    };
    return op;
}

namespace {

// linear stride of mode n (0-based) under last-index-fastest layout
std::size_t mode_stride(const Shape& shape, std::size_t n0)
{
    std::size_t s = 1;
    for (std::size_t m = n0 + 1; m < shape.size(); ++m) s *= shape[m];
    return s;
}

// Visits every offset whose mode-n0 index is below the last slice.
// f(off) receives the offset; off + stride is the forward neighbour.
template <class F>
void for_each_interior(const Shape& shape, std::size_t n0, F&& f)
{
    const std::size_t total = shape_size(shape);
    const std::size_t stride = mode_stride(shape, n0);
    const std::size_t extent = shape[n0];
    const std::size_t block = stride * extent;
    for (std::size_t base = 0; base < total; base += block)
        for (std::size_t i = 0; i + 1 < extent; ++i)
            for (std::size_t r = 0; r < stride; ++r)
                f(base + i * stride + r);
}

} // namespace

FieldOperator gradient_op(const Shape& shape)
{
    FieldOperator op;
    op.domain_shape = shape;
    op.codomain_shape = shape;
    op.apply = [shape](const DenseTensor& x) {
        if (x.shape() != shape)
            throw DimensionError("gradient_op: operand shape mismatch");
        GradientField g = zero_field(shape);
        for (std::size_t n0 = 0; n0 < shape.size(); ++n0) {
            const std::size_t stride = mode_stride(shape, n0);
            auto out = g.blocks[n0].data();
            const auto in = x.data();
            for_each_interior(shape, n0, [&](std::size_t off) {
                out[off] = in[off + stride] - in[off];
            });
        }
        return g;
    };
    op.adjoint = [shape](const GradientField& p) {
        if (p.blocks.size() != shape.size())
            throw DimensionError("gradient_op adjoint: block count mismatch");
        DenseTensor out(shape);
        auto acc = out.data();
        for (std::size_t n0 = 0; n0 < shape.size(); ++n0) {
            if (p.blocks[n0].shape() != shape)
                throw DimensionError("gradient_op adjoint: block shape mismatch");
            const std::size_t stride = mode_stride(shape, n0);
            const auto pb = p.blocks[n0].data();
            // transpose of out[off] = x[off+stride] - x[off]; entries of p on
            // the last slice of mode n never contribute
            for_each_interior(shape, n0, [&](std::size_t off) {
                acc[off + stride] += pb[off];
                acc[off] -= pb[off];
            });
        }
        return out;
    };
    return op;
}

TensorOperator compose(const TensorOperator& outer, const TensorOperator& inner)
{
    if (inner.codomain_shape != outer.domain_shape)
        throw DimensionError("compose: inner codomain " + shape_to_string(inner.codomain_shape) +
                             " does not match outer domain " +
                             shape_to_string(outer.domain_shape));
    TensorOperator op;
    op.domain_shape = inner.domain_shape;
    op.codomain_shape = outer.codomain_shape;
    op.apply = [outer, inner](const DenseTensor& x) { return outer.apply(inner.apply(x)); };
    op.adjoint = [outer, inner](const DenseTensor& p) { return inner.adjoint(outer.adjoint(p)); };
    return op;
}

} // namespace tenprox
