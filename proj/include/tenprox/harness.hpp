#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tenprox/extrap.hpp"
#include "tenprox/solvers.hpp"

namespace tenprox {

/// Reads an 8-bit PNG, PPM or PGM image as a height x width x channels
/// tensor with entries in [0,1] (byte / 255). channels is 1 or 3.
DenseTensor load_image(const std::string& path);

/// Writes a height x width x {1,3} tensor as 8-bit PNG, PPM or PGM
/// (chosen by extension). Entries are clamped to [0,1] and rounded, so an
/// 8-bit load/save round trip is byte exact.
void save_image(const DenseTensor& image, const std::string& path);

/// Smooth, low-rank test image used by the benchmark when no file is given.
DenseTensor synthetic_image(std::size_t height, std::size_t width, std::size_t channels = 3);

struct MaskSpec {
    enum class Kind { RandomFraction, Pattern };
    Kind kind = Kind::RandomFraction;
    double p = 0.5; // fraction of missing entries, in [0,1)
    std::uint64_t seed = 0;
    bool per_pixel = true; // drop whole pixels across channels (vs single entries)
    std::string pattern_path; // Kind::Pattern: missing where the mask image is black
};

/// Deterministic observed-entry set for the given data shape.
ObservedSet make_mask(const Shape& shape, const MaskSpec& spec);

/// 10 log10(1 / MSE) on unit-range images; +infinity for identical inputs.
double psnr(const DenseTensor& x, const DenseTensor& reference);

/// ||x - reference||_F / ||reference||_F; the reference must be nonzero.
double relative_error(const DenseTensor& x, const DenseTensor& reference);

/// One benchmark row. `outer_iters` counts outer iterations for the plain
/// solvers and total base iterations for the extrapolated ones.
struct ExperimentRecord {
    std::string algorithm;
    double mask_level = 0.0;
    double psnr_db = 0.0;
    double rel_error = 0.0;
    double wall_s = 0.0;
    int outer_iters = 0;
    int cycles = 0;
    std::uint64_t seed = 0;
    bool diverged = false;
    std::string config_json; // effective configuration snapshot
};

enum class RecordFormat { Csv, JsonLines };

/// One row/object per record in the stable order
/// algorithm, mask_level, psnr_db, rel_error, wall_s, outer_iters, cycles,
/// seed. JSON lines additionally embed the config snapshot.
void emit_records(const std::vector<ExperimentRecord>& records, std::ostream& out,
                  RecordFormat format);
void emit_records(const std::vector<ExperimentRecord>& records, const std::string& path,
                  RecordFormat format);

struct ExperimentConfig {
    MaskSpec mask;
    std::vector<std::string> algorithms = {"TISTA",    "TISTA-TET", "TISTA-HM",
                                           "TDPG",     "TDPG-TET",  "TDPG-HM"};
    SolverConfig solver;
    double mu_tista = 0.01;
    double mu_tdpg = 0.05;
    std::optional<double> mu_override; // forces one mu for every algorithm
    OmegaKind omega = OmegaKind::Box;
    double epsilon = 0.0; // nuclear-ball radius; 0 selects 1.5 x the
                          // masked image's mode-1 unfolding nuclear norm
    int window_m = 4;
    bool paper_literal_sign = false;
};

/// Runs the selected algorithms on one image and mask: builds B as the
/// observed part of the original, solves each completion problem from
/// x0 = B with identical seeds, and records PSNR / relative error / wall
/// time / iteration counts. A diverging solver flags its record and the
/// run continues. Recovered tensors are returned through `recovered` when
/// non-null, in algorithm order.
std::vector<ExperimentRecord> run_completion_experiment(const DenseTensor& original,
                                                        const ExperimentConfig& config,
                                                        std::vector<DenseTensor>* recovered =
                                                            nullptr);

} // namespace tenprox
