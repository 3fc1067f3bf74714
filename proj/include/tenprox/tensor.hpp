#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace tenprox {

/// Incompatible shapes, modes out of range, inconsistent fold dimensions.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Invalid scalar parameters (negative thresholds, k = 0, lo > hi, ...).
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Non-finite values or failed matrix factorizations.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Unreadable or unwritable files.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_to_string(const Shape& shape);

/// 1-based multi-index (i1,...,iN), 1 <= in <= In.
struct TensorIndex {
    std::vector<std::size_t> coords;
};

/// Dense N-way real tensor. Entries are stored row-major with the LAST
/// index varying fastest, so for a 2x2x2 tensor the linear order is
/// (1,1,1),(1,1,2),(1,2,1),(1,2,2),(2,1,1),... All entries are finite.
class DenseTensor {
public:
    DenseTensor() = default;
    explicit DenseTensor(Shape shape);
    DenseTensor(Shape shape, std::vector<double> data);

    static DenseTensor zeros(Shape shape);
    static DenseTensor constant(Shape shape, double value);

    const Shape& shape() const { return shape_; }
    std::size_t order() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }

    std::span<const double> data() const { return data_; }
    std::span<double> data() { return data_; }

    double operator[](std::size_t i) const { return data_[i]; }
    double& operator[](std::size_t i) { return data_[i]; }

    /// Linear offset of a 1-based multi-index.
    std::size_t linear_index(const TensorIndex& idx) const;
    double at(const TensorIndex& idx) const { return data_[linear_index(idx)]; }
    double& at(const TensorIndex& idx) { return data_[linear_index(idx)]; }

    DenseTensor& operator+=(const DenseTensor& rhs);
    DenseTensor& operator-=(const DenseTensor& rhs);
    DenseTensor& operator*=(double c);

    friend DenseTensor operator+(DenseTensor lhs, const DenseTensor& rhs) { return lhs += rhs; }
    friend DenseTensor operator-(DenseTensor lhs, const DenseTensor& rhs) { return lhs -= rhs; }
    friend DenseTensor operator*(double c, DenseTensor t) { return t *= c; }

private:
    Shape shape_;
    std::vector<double> data_;
};

bool same_shape(const DenseTensor& a, const DenseTensor& b);
void require_same_shape(const DenseTensor& a, const DenseTensor& b, const char* where);

/// <a|b> = sum of elementwise products. Shapes must match.
double inner_product(const DenseTensor& a, const DenseTensor& b);

/// (sum |x_i|^k)^(1/k), k >= 1. k=2 is the Frobenius norm.
double k_norm(const DenseTensor& x, unsigned k);

/// Largest entry magnitude.
double inf_norm(const DenseTensor& x);

double frobenius_norm(const DenseTensor& x);

/// Mode-n matricization (n is 1-based): rows are mode-n fibers, columns
/// ordered over the remaining modes in increasing order with the lowest
/// mode varying fastest. For the 2x2x2 tensor with X(i1,i2,i3) =
/// i1 + 2(i2-1) + 4(i3-1), mode-1 gives
///   [1 3 5 7]
///   [2 4 6 8]
/// (columns run over (i2,i3) = (1,1),(2,1),(1,2),(2,2)).
Eigen::MatrixXd mode_n_unfold(const DenseTensor& x, std::size_t n);

/// Inverse of mode_n_unfold for the given target shape.
DenseTensor mode_n_fold(const Eigen::MatrixXd& m, std::size_t n, const Shape& shape);

/// Sum over all modes of the matrix nuclear norms of the unfoldings.
/// Singular values below 1e-12 * sigma_max are treated as zero.
double nuclear_norm(const DenseTensor& x);

/// Contraction of an order-2N tensor with an order-N tensor:
/// out(i1..iN) = sum_j a(i1..iN, j1..jN) x(j1..jN).
DenseTensor einstein_product(const DenseTensor& a, const DenseTensor& x);

/// Order-2N Kronecker delta: identity of the Einstein product on `shape`.
DenseTensor einstein_identity(const Shape& shape);

/// alpha*x + y elementwise.
DenseTensor axpy(double alpha, const DenseTensor& x, const DenseTensor& y);

DenseTensor zero_like(const DenseTensor& x);
DenseTensor scale(double c, const DenseTensor& x);
bool all_finite(const DenseTensor& x);

/// Deterministic generator used for every seeded path (masks, probe
/// tensors, power-iteration starts). mt19937_64 plus explicit bit
/// arithmetic keeps streams identical across platforms; the standard
/// distributions are not portable.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    /// Uniform in [0, 1).
    double uniform();
    /// Uniform in [lo, hi).
    double uniform(double lo, double hi);
    /// Standard normal via Box-Muller.
    double normal();
    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);

private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

DenseTensor random_uniform(const Shape& shape, Rng& rng, double lo = 0.0, double hi = 1.0);
DenseTensor random_normal(const Shape& shape, Rng& rng);

} // namespace tenprox
