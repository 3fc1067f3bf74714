#include "tenprox/extrap.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

namespace tenprox {

namespace {

std::vector<DenseTensor> first_differences(std::span<const DenseTensor> window)
{
    std::vector<DenseTensor> d;
    d.reserve(window.size() - 1);
    for (std::size_t j = 0; j + 1 < window.size(); ++j) {
        DenseTensor diff = window[j + 1];
        diff -= window[j];
        d.push_back(std::move(diff));
    }
    return d;
}

} // namespace

ExtrapolationOutcome gt_tet(std::span<const DenseTensor> window, int m, const DenseTensor* probe,
                            bool paper_literal_sign)
{
    if (m < 1)
        throw ParameterError("gt_tet: m must be >= 1");
    if (window.size() != static_cast<std::size_t>(2 * m + 1))
        throw DimensionError("gt_tet: window must hold 2m+1 iterates, got " +
                             std::to_string(window.size()));
    for (std::size_t j = 1; j < window.size(); ++j)
        require_same_shape(window[j], window[0], "gt_tet");
    if (probe != nullptr)
        require_same_shape(*probe, window[0], "gt_tet probe");

    const std::vector<DenseTensor> d1 = first_differences(window); // 2m entries
    const std::vector<DenseTensor> d2 = first_differences(d1);     // 2m-1 entries
    const DenseTensor& y = (probe != nullptr) ? *probe : d1[0];

    Eigen::MatrixXd h(m, m);
    Eigen::VectorXd b(m);
    for (int i = 0; i < m; ++i) {
        b(i) = inner_product(y, d1[static_cast<std::size_t>(i)]);
        for (int j = 0; j < m; ++j)
            h(i, j) = inner_product(y, d2[static_cast<std::size_t>(i + j)]);
    }

    ExtrapolationOutcome out;
    out.failed = true;
    out.value = window.back();

    const Eigen::VectorXd rhs = paper_literal_sign ? b : Eigen::VectorXd(-b);
    auto try_solve = [&](const Eigen::MatrixXd& mat) -> bool {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(mat);
        const Eigen::VectorXd rdiag = qr.matrixR().diagonal().cwiseAbs();
        const double rmax = rdiag.maxCoeff();
        if (rmax <= 0.0 || rdiag.minCoeff() < 1e-12 * rmax)
            return false;
        const Eigen::VectorXd c = qr.solve(rhs);
        if (!c.allFinite())
            return false;
        out.weights.assign(c.data(), c.data() + c.size());
        out.condition = rmax / rdiag.minCoeff();
        out.failed = false;
        return true;
    };

    if (!try_solve(h)) {
        // ridge rescue against near-rank-deficient windows
        const double ridge = 1e-12 * h.trace() / double(m);
        Eigen::MatrixXd hr = h;
        hr.diagonal().array() += ridge;
        if (!try_solve(hr)) {
            out.condition = std::numeric_limits<double>::infinity();
            return out;
        }
    }

    DenseTensor t = window[0];
    for (int j = 0; j < m; ++j)
        t = axpy(out.weights[static_cast<std::size_t>(j)], d1[static_cast<std::size_t>(j)], t);
    out.value = std::move(t);
    return out;
}

ExtrapolationOutcome hosvd_mpe(std::span<const DenseTensor> window, int m)
{
    if (m < 1)
        throw ParameterError("hosvd_mpe: m must be >= 1");
    if (window.size() != static_cast<std::size_t>(m + 1))
        throw DimensionError("hosvd_mpe: window must hold m+1 iterates, got " +
                             std::to_string(window.size()));
    for (std::size_t j = 1; j < window.size(); ++j)
        require_same_shape(window[j], window[0], "hosvd_mpe");

    const std::vector<DenseTensor> d1 = first_differences(window); // m slices

    // Gram matrix of the difference slices: the slice-mode unfolding of the
    // stacked difference tensor times its transpose.
    Eigen::MatrixXd gram(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = i; j < m; ++j) {
            const double v =
                inner_product(d1[static_cast<std::size_t>(i)], d1[static_cast<std::size_t>(j)]);
            gram(i, j) = v;
            gram(j, i) = v;
        }

    ExtrapolationOutcome out;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    if (eig.info() != Eigen::Success) {
        out.failed = true;
        out.value = window.back();
        out.condition = std::numeric_limits<double>::infinity();
        return out;
    }
    // eigenvalues ascend: column 0 minimizes ||sum_i delta_i DeltaX_i||
    Eigen::VectorXd delta = eig.eigenvectors().col(0);
    const double lambda_min = eig.eigenvalues()(0);
    const double lambda_max = eig.eigenvalues()(m - 1);
    out.condition = (lambda_min > 0.0) ? lambda_max / lambda_min
                                       : std::numeric_limits<double>::infinity();

    double total = delta.sum();
    if (total < 0.0) {
        delta = -delta;
        total = -total;
    }
    if (std::abs(total) < 1e-10) {
        out.failed = true;
        out.value = window.back();
        return out;
    }

    out.weights.resize(static_cast<std::size_t>(m));
    DenseTensor t = zero_like(window[0]);
    for (int j = 0; j < m; ++j) {
        const double c = delta(j) / total;
        out.weights[static_cast<std::size_t>(j)] = c;
        t = axpy(c, window[static_cast<std::size_t>(j)], t);
    }
    out.value = std::move(t);
    return out;
}

SolveReport restarted_accelerate(const BaseSolver& base, const AccelOptions& options,
                                 const DenseTensor& x0)
{
    if (options.m < 1)
        throw ParameterError("restarted_accelerate: m must be >= 1");
    if (options.tol <= 0.0)
        throw ParameterError("restarted_accelerate: tol must be positive");
    if (options.max_cycles < 1)
        throw ParameterError("restarted_accelerate: max_cycles must be >= 1");

    const int window_size =
        (options.method == ExtrapMethod::GtTet) ? 2 * options.m + 1 : options.m + 1;

    SolveReport report;
    const auto t0 = std::chrono::steady_clock::now();

    DenseTensor t_prev = x0;
    DenseTensor start = x0;
    for (int cycle = 1; cycle <= options.max_cycles; ++cycle) {
        std::vector<DenseTensor> window;
        window.reserve(static_cast<std::size_t>(window_size));
        window.push_back(start);
        std::vector<DenseTensor> produced = base.run(start, window_size - 1);
        for (auto& it : produced)
            window.push_back(std::move(it));
        report.iterates_used += window_size - 1;

        const ExtrapolationOutcome outcome =
            (options.method == ExtrapMethod::GtTet)
                ? gt_tet(window, options.m, nullptr, options.paper_literal_sign)
                : hosvd_mpe(window, options.m);

        DenseTensor t_next;
        if (outcome.failed) {
            t_next = window.back();
        } else {
            t_next = base.project(outcome.value);
            // never accept an extrapolant that loses to the window itself
            std::size_t best = 0;
            double best_obj = base.objective(window[0]);
            for (std::size_t j = 1; j < window.size(); ++j) {
                const double obj = base.objective(window[j]);
                if (obj < best_obj) {
                    best_obj = obj;
                    best = j;
                }
            }
            if (base.objective(t_next) > best_obj)
                t_next = window[best];
        }

        IterationRecord rec;
        rec.objective = base.objective(t_next);
        rec.rel_change = relative_change(t_next, t_prev);
        rec.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (options.progress_metric) {
            rec.metric = options.progress_metric(t_next);
            rec.has_metric = true;
        }
        report.history.push_back(rec);
        report.cycles = cycle;

        t_prev = t_next;
        start = std::move(t_next);
        if (rec.rel_change < options.tol) {
            report.stopped_by = StopReason::Tolerance;
            break;
        }
    }
    report.final = std::move(t_prev);
    return report;
}

} // namespace tenprox
