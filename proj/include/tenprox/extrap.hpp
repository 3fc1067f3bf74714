#pragma once

#include <functional>
#include <span>
#include <vector>

#include "tenprox/solvers.hpp"
#include "tenprox/tensor.hpp"

namespace tenprox {

struct ExtrapolationOutcome {
    DenseTensor value;
    std::vector<double> weights;
    double condition = 0.0; // conditioning indicator of the weight system
    bool failed = false;    // degenerate window; value falls back to the last iterate
};

/// Topological extrapolation of a tensor sequence. Takes 2m+1 iterates
/// S_n..S_{n+2m} and returns T = S_n + sum_j c_j Delta S_{n+j-1}, where the
/// weights solve H c = -b with H_ij = <probe, Delta^2 S_{n+i+j-2}> and
/// b_i = <probe, Delta S_{n+i-1}> (QR with a ridge rescue on rank
/// deficiency). The -b orientation makes m = 1 reduce to Aitken's
/// delta-squared; paper_literal_sign = true restores H c = +b.
/// The probe defaults to Delta S_n.
ExtrapolationOutcome gt_tet(std::span<const DenseTensor> window, int m,
                            const DenseTensor* probe = nullptr, bool paper_literal_sign = false);

/// Minimal-polynomial extrapolation of a tensor sequence. Takes m+1
/// iterates X_n..X_{n+m}, stacks the m differences as frontal slices,
/// forms the m x m Gram matrix of the slices, takes delta = eigenvector of
/// its smallest eigenvalue (sign fixed so sum delta > 0), normalizes
/// c = delta / sum(delta), and returns sum_j c_j X_{n+j-1}. Exact for
/// sequences whose error lives in a geometric kernel of dimension < m.
ExtrapolationOutcome hosvd_mpe(std::span<const DenseTensor> window, int m);

enum class ExtrapMethod { GtTet, HosvdMpe };

/// The base iteration as seen by the restarted driver: produce successive
/// iterates from a start, evaluate the objective, project onto the
/// feasible set.
struct BaseSolver {
    std::function<std::vector<DenseTensor>(const DenseTensor& start, int count)> run;
    std::function<double(const DenseTensor&)> objective;
    std::function<DenseTensor(const DenseTensor&)> project;
};

struct AccelOptions {
    ExtrapMethod method = ExtrapMethod::HosvdMpe;
    int m = 4;
    double tol = 1e-3;
    int max_cycles = 200;
    bool paper_literal_sign = false;
    std::function<double(const DenseTensor&)> progress_metric;
};

/// Restarted acceleration: run the base solver for one extrapolation
/// window (m+1 iterates for HOSVD-MPE, 2m+1 for GT-TET, including the
/// cycle start), extrapolate, project the extrapolated tensor onto the
/// feasible set and restart from it. A degenerate window falls back to the
/// cycle's last base iterate; an extrapolant with worse objective than the
/// best base iterate of the cycle is replaced by that iterate. Stops when
/// consecutive extrapolated tensors differ relatively by less than tol.
/// The report counts total base iterations in iterates_used and records
/// one history entry per cycle.
SolveReport restarted_accelerate(const BaseSolver& base, const AccelOptions& options,
                                 const DenseTensor& x0);

} // namespace tenprox
