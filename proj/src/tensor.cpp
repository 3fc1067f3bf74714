#include "tenprox/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/SVD>

namespace tenprox {

std::size_t shape_size(const Shape& shape)
{
    std::size_t n = 1;
    for (std::size_t e : shape) n *= e;
    return n;
}

std::string shape_to_string(const Shape& shape)
{
    std::string s = "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += "x";
        s += std::to_string(shape[i]);
    }
    return s + ")";
}

namespace {

void validate_shape(const Shape& shape)
{
    if (shape.empty())
        throw DimensionError("tensor order must be >= 1");
    for (std::size_t e : shape)
        if (e == 0)
            throw DimensionError("tensor extents must be >= 1");
}

void validate_finite(const std::vector<double>& data, const char* where)
{
    for (double v : data)
        if (!std::isfinite(v))
            throw NumericalError(std::string(where) + ": non-finite entry");
}

} // namespace

DenseTensor::DenseTensor(Shape shape)
    : shape_(std::move(shape))
{
    validate_shape(shape_);
    data_.assign(shape_size(shape_), 0.0);
}

DenseTensor::DenseTensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data))
{
    validate_shape(shape_);
    if (data_.size() != shape_size(shape_))
        throw DimensionError("data length " + std::to_string(data_.size()) +
                             " does not match shape " + shape_to_string(shape_));
    validate_finite(data_, "DenseTensor");
}

DenseTensor DenseTensor::zeros(Shape shape)
{
    return DenseTensor(std::move(shape));
}

DenseTensor DenseTensor::constant(Shape shape, double value)
{
    DenseTensor t(std::move(shape));
    std::fill(t.data_.begin(), t.data_.end(), value);
    return t;
}

std::size_t DenseTensor::linear_index(const TensorIndex& idx) const
{
    if (idx.coords.size() != shape_.size())
        throw DimensionError("index order does not match tensor order");
    std::size_t off = 0;
    for (std::size_t n = 0; n < shape_.size(); ++n) {
        const std::size_t i = idx.coords[n];
        if (i < 1 || i > shape_[n])
            throw DimensionError("index " + std::to_string(i) + " out of range for mode " +
                                 std::to_string(n + 1));
        off = off * shape_[n] + (i - 1);
    }
    return off;
}

DenseTensor& DenseTensor::operator+=(const DenseTensor& rhs)
{
    require_same_shape(*this, rhs, "operator+=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += rhs.data_[i];
    return *this;
}

DenseTensor& DenseTensor::operator-=(const DenseTensor& rhs)
{
    require_same_shape(*this, rhs, "operator-=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= rhs.data_[i];
    return *this;
}

DenseTensor& DenseTensor::operator*=(double c)
{
    for (double& v : data_) v *= c;
    return *this;
}

bool same_shape(const DenseTensor& a, const DenseTensor& b)
{
    return a.shape() == b.shape();
}

void require_same_shape(const DenseTensor& a, const DenseTensor& b, const char* where)
{
    if (!same_shape(a, b))
        throw DimensionError(std::string(where) + ": shape mismatch " +
                             shape_to_string(a.shape()) + " vs " + shape_to_string(b.shape()));
}

double inner_product(const DenseTensor& a, const DenseTensor& b)
{
    require_same_shape(a, b, "inner_product");
    double s = 0.0;
    const auto da = a.data();
    const auto db = b.data();
    for (std::size_t i = 0; i < da.size(); ++i) s += da[i] * db[i];
    return s;
}

double k_norm(const DenseTensor& x, unsigned k)
{
    if (k == 0)
        throw ParameterError("k_norm: k must be >= 1");
    double s = 0.0;
    if (k == 1) {
        for (double v : x.data()) s += std::abs(v);
        return s;
    }
    if (k == 2) {
        for (double v : x.data()) s += v * v;
        return std::sqrt(s);
    }
    for (double v : x.data()) s += std::pow(std::abs(v), double(k));
    return std::pow(s, 1.0 / double(k));
}

double inf_norm(const DenseTensor& x)
{
    double m = 0.0;
    for (double v : x.data()) m = std::max(m, std::abs(v));
    return m;
}

double frobenius_norm(const DenseTensor& x)
{
    return k_norm(x, 2);
}

namespace {

// Strides of the unfolding columns: remaining modes in increasing order,
// the lowest one varying fastest.
std::vector<std::size_t> unfold_col_strides(const Shape& shape, std::size_t n0)
{
    std::vector<std::size_t> stride(shape.size(), 0);
    std::size_t s = 1;
    for (std::size_t k = 0; k < shape.size(); ++k) {
        if (k == n0) continue;
        stride[k] = s;
        s *= shape[k];
    }
    return stride;
}

} // namespace

Eigen::MatrixXd mode_n_unfold(const DenseTensor& x, std::size_t n)
{
    const Shape& shape = x.shape();
    if (n < 1 || n > shape.size())
        throw DimensionError("mode_n_unfold: mode " + std::to_string(n) + " out of range");
    const std::size_t n0 = n - 1;
    const std::size_t rows = shape[n0];
    const std::size_t cols = x.size() / rows;
    const auto col_stride = unfold_col_strides(shape, n0);

    Eigen::MatrixXd m(rows, cols);
    std::vector<std::size_t> idx(shape.size(), 0);
    const auto data = x.data();
    for (std::size_t off = 0; off < data.size(); ++off) {
        std::size_t col = 0;
        for (std::size_t k = 0; k < shape.size(); ++k)
            if (k != n0) col += idx[k] * col_stride[k];
        m(static_cast<Eigen::Index>(idx[n0]), static_cast<Eigen::Index>(col)) = data[off];
        // advance the multi-index, last mode fastest
        for (std::size_t k = shape.size(); k-- > 0;) {
            if (++idx[k] < shape[k]) break;
            idx[k] = 0;
        }
    }
    return m;
}

DenseTensor mode_n_fold(const Eigen::MatrixXd& m, std::size_t n, const Shape& shape)
{
    validate_shape(shape);
    if (n < 1 || n > shape.size())
        throw DimensionError("mode_n_fold: mode " + std::to_string(n) + " out of range");
    const std::size_t n0 = n - 1;
    if (static_cast<std::size_t>(m.rows()) != shape[n0] ||
        static_cast<std::size_t>(m.cols()) != shape_size(shape) / shape[n0])
        throw DimensionError("mode_n_fold: matrix is " + std::to_string(m.rows()) + "x" +
                             std::to_string(m.cols()) + ", inconsistent with shape " +
                             shape_to_string(shape) + " at mode " + std::to_string(n));
    const auto col_stride = unfold_col_strides(shape, n0);

    DenseTensor x(shape);
    std::vector<std::size_t> idx(shape.size(), 0);
    auto data = x.data();
    for (std::size_t off = 0; off < data.size(); ++off) {
        std::size_t col = 0;
        for (std::size_t k = 0; k < shape.size(); ++k)
            if (k != n0) col += idx[k] * col_stride[k];
        data[off] = m(static_cast<Eigen::Index>(idx[n0]), static_cast<Eigen::Index>(col));
        for (std::size_t k = shape.size(); k-- > 0;) {
            if (++idx[k] < shape[k]) break;
            idx[k] = 0;
        }
    }
    return x;
}

double nuclear_norm(const DenseTensor& x)
{
    double total = 0.0;
    for (std::size_t n = 1; n <= x.order(); ++n) {
        const Eigen::MatrixXd m = mode_n_unfold(x, n);
        Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
        if (svd.info() != Eigen::Success)
            throw NumericalError("nuclear_norm: SVD did not converge on mode " + std::to_string(n));
        const auto& sv = svd.singularValues();
        if (sv.size() == 0) continue;
        const double cutoff = 1e-12 * sv(0);
        for (Eigen::Index i = 0; i < sv.size(); ++i)
            if (sv(i) > cutoff) total += sv(i);
    }
    return total;
}

DenseTensor einstein_product(const DenseTensor& a, const DenseTensor& x)
{
    if (a.order() % 2 != 0)
        throw DimensionError("einstein_product: first argument must have even order");
    const std::size_t n = a.order() / 2;
    if (x.order() != n)
        throw DimensionError("einstein_product: second argument must have order " + std::to_string(n));
    Shape out_shape(a.shape().begin(), a.shape().begin() + n);
    Shape in_shape(a.shape().begin() + n, a.shape().end());
    if (in_shape != x.shape())
        throw DimensionError("einstein_product: trailing extents " + shape_to_string(in_shape) +
                             " do not match operand shape " + shape_to_string(x.shape()));

    const std::size_t rows = shape_size(out_shape);
    const std::size_t cols = x.size();
    // Row-major storage with the last indices fastest makes the linear
    // layout of `a` exactly the (rows x cols) contraction matrix.
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
        amat(a.data().data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    Eigen::Map<const Eigen::VectorXd> xvec(x.data().data(), static_cast<Eigen::Index>(cols));

    DenseTensor out(out_shape);
    Eigen::Map<Eigen::VectorXd> ovec(out.data().data(), static_cast<Eigen::Index>(rows));
    ovec = amat * xvec;
    return out;
}

DenseTensor einstein_identity(const Shape& shape)
{
    validate_shape(shape);
    Shape full(shape);
    full.insert(full.end(), shape.begin(), shape.end());
    DenseTensor id(full);
    const std::size_t n = shape_size(shape);
    for (std::size_t i = 0; i < n; ++i)
        id[i * n + i] = 1.0;
    return id;
}

DenseTensor axpy(double alpha, const DenseTensor& x, const DenseTensor& y)
{
    require_same_shape(x, y, "axpy");
    DenseTensor out(x.shape());
    const auto dx = x.data();
    const auto dy = y.data();
    auto dout = out.data();
    for (std::size_t i = 0; i < dout.size(); ++i) dout[i] = alpha * dx[i] + dy[i];
    return out;
}

DenseTensor zero_like(const DenseTensor& x)
{
    return DenseTensor(x.shape());
}

DenseTensor scale(double c, const DenseTensor& x)
{
    DenseTensor out = x;
    out *= c;
    return out;
}

bool all_finite(const DenseTensor& x)
{
    for (double v : x.data())
        if (!std::isfinite(v)) return false;
    return true;
}

double Rng::uniform()
{
    // 53 high bits -> [0, 1)
    return double(gen_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi)
{
    return lo + (hi - lo) * uniform();
}

double Rng::normal()
{
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
}

std::uint64_t Rng::below(std::uint64_t n)
{
    // modulo bias is irrelevant at the sizes used here
    return gen_() % n;
}

DenseTensor random_uniform(const Shape& shape, Rng& rng, double lo, double hi)
{
    DenseTensor t(shape);
    for (double& v : t.data()) v = rng.uniform(lo, hi);
    return t;
}

DenseTensor random_normal(const Shape& shape, Rng& rng)
{
    DenseTensor t(shape);
    for (double& v : t.data()) v = rng.normal();
    return t;
}

} // namespace tenprox
