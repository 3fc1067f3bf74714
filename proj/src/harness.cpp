#include "tenprox/harness.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/SVD>
#include <nlohmann/json.hpp>

namespace tenprox {

using nlohmann::json;

DenseTensor synthetic_image(std::size_t height, std::size_t width, std::size_t channels)
{
    DenseTensor img({height, width, channels});
    auto d = img.data();
    auto row_wave = [height](std::size_t i) {
        return std::sin(std::numbers::pi * (double(i) + 0.5) / double(height));
    };
    auto col_ramp = [width](std::size_t j) { return (double(j) + 0.5) / double(width); };
    std::size_t off = 0;
    for (std::size_t i = 0; i < height; ++i)
        for (std::size_t j = 0; j < width; ++j)
            for (std::size_t c = 0; c < channels; ++c) {
                double v = 0.0;
                switch (c % 3) {
                case 0:
                    v = 0.15 + 0.7 * row_wave(i) * row_wave(j % height);
                    break;
                case 1:
                    v = 0.15 + 0.7 * row_wave(i) * col_ramp(j);
                    break;
                default:
                    v = 0.15 + 0.35 * row_wave(i) * row_wave(j % height) +
                        0.35 * col_ramp(i % width) * col_ramp(j);
                    break;
                }
                d[off++] = std::min(1.0, std::max(0.0, v));
            }
    return img;
}

ObservedSet make_mask(const Shape& shape, const MaskSpec& spec)
{
    ObservedSet observed;
    observed.shape = shape;
    observed.mask.assign(shape_size(shape), 1);

    if (spec.kind == MaskSpec::Kind::Pattern) {
        const DenseTensor pattern = load_image(spec.pattern_path);
        if (shape.size() != 3 || pattern.shape()[0] != shape[0] || pattern.shape()[1] != shape[1])
            throw DimensionError("make_mask: pattern shape " + shape_to_string(pattern.shape()) +
                                 " does not match data shape " + shape_to_string(shape));
        const std::size_t h = shape[0], w = shape[1], c = shape[2];
        const std::size_t pc = pattern.shape()[2];
        for (std::size_t i = 0; i < h; ++i)
            for (std::size_t j = 0; j < w; ++j) {
                double lum = 0.0;
                for (std::size_t k = 0; k < pc; ++k)
                    lum += pattern[(i * w + j) * pc + k];
                lum /= double(pc);
                if (lum < 0.5) // black marks missing pixels
                    for (std::size_t k = 0; k < c; ++k)
                        observed.mask[(i * w + j) * c + k] = 0;
            }
        observed.validate();
        return observed;
    }

    if (!(spec.p >= 0.0 && spec.p < 1.0))
        throw ParameterError("make_mask: missing fraction must lie in [0,1)");
    Rng rng(spec.seed);
    if (spec.per_pixel && shape.size() == 3) {
        const std::size_t h = shape[0], w = shape[1], c = shape[2];
        for (std::size_t i = 0; i < h; ++i)
            for (std::size_t j = 0; j < w; ++j)
                if (rng.uniform() < spec.p)
                    for (std::size_t k = 0; k < c; ++k)
                        observed.mask[(i * w + j) * c + k] = 0;
    } else {
        for (auto& m : observed.mask)
            if (rng.uniform() < spec.p)
                m = 0;
    }
    observed.validate();
    return observed;
}

double psnr(const DenseTensor& x, const DenseTensor& reference)
{
    require_same_shape(x, reference, "psnr");
    DenseTensor diff = x;
    diff -= reference;
    const double n = frobenius_norm(diff);
    const double mse = n * n / double(x.size());
    if (mse == 0.0)
        return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / mse);
}

double relative_error(const DenseTensor& x, const DenseTensor& reference)
{
    require_same_shape(x, reference, "relative_error");
    const double den = frobenius_norm(reference);
    if (den == 0.0)
        throw ParameterError("relative_error: reference tensor is zero");
    DenseTensor diff = x;
    diff -= reference;
    return frobenius_norm(diff) / den;
}

namespace {

std::string format_double(double v)
{
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

void emit_csv(const std::vector<ExperimentRecord>& records, std::ostream& out)
{
    out << "algorithm,mask_level,psnr_db,rel_error,wall_s,outer_iters,cycles,seed\n";
    for (const auto& r : records) {
        out << r.algorithm << ',' << format_double(r.mask_level) << ','
            << format_double(r.psnr_db) << ',' << format_double(r.rel_error) << ','
            << format_double(r.wall_s) << ',' << r.outer_iters << ',' << r.cycles << ',' << r.seed
            << '\n';
    }
}

void emit_jsonl(const std::vector<ExperimentRecord>& records, std::ostream& out)
{
    for (const auto& r : records) {
        json row;
        row["algorithm"] = r.algorithm;
        row["mask_level"] = r.mask_level;
        if (std::isinf(r.psnr_db))
            row["psnr_db"] = "inf";
        else
            row["psnr_db"] = r.psnr_db;
        row["rel_error"] = r.rel_error;
        row["wall_s"] = r.wall_s;
        row["outer_iters"] = r.outer_iters;
        row["cycles"] = r.cycles;
        row["seed"] = r.seed;
        if (!r.config_json.empty())
            row["config"] = json::parse(r.config_json);
        out << row.dump() << '\n';
    }
}

} // namespace

void emit_records(const std::vector<ExperimentRecord>& records, std::ostream& out,
                  RecordFormat format)
{
    if (format == RecordFormat::Csv)
        emit_csv(records, out);
    else
        emit_jsonl(records, out);
}

void emit_records(const std::vector<ExperimentRecord>& records, const std::string& path,
                  RecordFormat format)
{
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot open output file: " + path);
    emit_records(records, out, format);
    if (!out)
        throw IoError("failed writing records to " + path);
}

namespace {

struct AlgorithmPlan {
    bool tv = false; // TDPG family vs TISTA family
    ExtrapMethod method = ExtrapMethod::HosvdMpe;
    bool accelerated = false;
};

AlgorithmPlan parse_algorithm(const std::string& name)
{
    AlgorithmPlan plan;
    std::string base = name;
    if (const auto dash = name.find('-'); dash != std::string::npos) {
        base = name.substr(0, dash);
        const std::string suffix = name.substr(dash + 1);
        plan.accelerated = true;
        if (suffix == "TET")
            plan.method = ExtrapMethod::GtTet;
        else if (suffix == "HM")
            plan.method = ExtrapMethod::HosvdMpe;
        else
            throw ParameterError("unknown extrapolation suffix in algorithm '" + name + "'");
    }
    if (base == "TDPG")
        plan.tv = true;
    else if (base != "TISTA")
        throw ParameterError("unknown algorithm '" + name + "'");
    return plan;
}

std::string config_snapshot(const ExperimentConfig& config, const std::string& algorithm,
                            double mu, double alpha_used, double epsilon_used)
{
    json j;
    j["algorithm"] = algorithm;
    j["mu"] = mu;
    j["alpha"] = alpha_used;
    j["tol"] = config.solver.tol;
    j["max_outer"] = config.solver.max_outer;
    j["inner"] = config.solver.inner.max_inner;
    j["rho"] = config.solver.inner.rho;
    j["beta0"] = config.solver.inner.beta0;
    j["dual_sign"] = config.solver.inner.dual_sign == DualSign::Alg ? "alg" : "proof";
    j["warm_start_dual"] = config.solver.warm_start_dual;
    j["gradient_adjoint"] = config.solver.gradient_adjoint;
    j["lipschitz_safety"] = config.solver.lipschitz_safety;
    j["window"] = config.window_m;
    j["paper_literal_sign"] = config.paper_literal_sign;
    j["mask_p"] = config.mask.p;
    j["mask_per_pixel"] = config.mask.per_pixel;
    j["seed"] = config.mask.seed;
    switch (config.omega) {
    case OmegaKind::WholeSpace:
        j["omega"] = "none";
        break;
    case OmegaKind::Box:
        j["omega"] = "box";
        break;
    case OmegaKind::NuclearBall:
        j["omega"] = "nuclear";
        j["epsilon"] = epsilon_used;
        break;
    }
    return j.dump();
}

template <TensorLike D>
SolveReport run_one(GtpgEngine<D>& engine, const SolverConfig& cfg, const DenseTensor& x0,
                    const AlgorithmPlan& plan, const ExperimentConfig& config)
{
    if (!plan.accelerated) {
        return gtpg_solve(engine.problem(), cfg, x0);
    }
    BaseSolver base;
    base.run = [&engine](const DenseTensor& start, int count) { return engine.run(start, count); };
    base.objective = [&engine](const DenseTensor& x) { return engine.objective_value(x); };
    base.project = [&engine](const DenseTensor& x) { return engine.project(x); };

    AccelOptions options;
    options.method = plan.method;
    options.m = config.window_m;
    options.tol = cfg.tol;
    options.max_cycles = cfg.max_outer;
    options.paper_literal_sign = config.paper_literal_sign;
    options.progress_metric = cfg.progress_metric;
    return restarted_accelerate(base, options, x0);
}

} // namespace

std::vector<ExperimentRecord> run_completion_experiment(const DenseTensor& original,
                                                        const ExperimentConfig& config,
                                                        std::vector<DenseTensor>* recovered)
{
    const ObservedSet observed = make_mask(original.shape(), config.mask);
    const TensorOperator p_e = mask_op(observed);
    const DenseTensor b = p_e.apply(original);

    ConstraintSet omega;
    double epsilon_used = 0.0;
    switch (config.omega) {
    case OmegaKind::WholeSpace:
        omega = ConstraintSet::whole_space();
        break;
    case OmegaKind::Box:
        omega = ConstraintSet::box(0.0, 1.0);
        break;
    case OmegaKind::NuclearBall: {
        epsilon_used = config.epsilon;
        if (epsilon_used <= 0.0) {
            Eigen::BDCSVD<Eigen::MatrixXd> svd(mode_n_unfold(b, 1));
            epsilon_used = 1.5 * svd.singularValues().sum();
        }
        omega = ConstraintSet::nuclear_ball(epsilon_used, 1);
        break;
    }
    }

    std::vector<ExperimentRecord> records;
    records.reserve(config.algorithms.size());
    if (recovered)
        recovered->clear();

    for (const std::string& name : config.algorithms) {
        const AlgorithmPlan plan = parse_algorithm(name);
        const double mu = config.mu_override.value_or(plan.tv ? config.mu_tdpg : config.mu_tista);

        SolverConfig cfg = config.solver;
        cfg.progress_metric = {}; // records carry final metrics only

        ExperimentRecord rec;
        rec.algorithm = name;
        rec.mask_level = config.mask.p;
        rec.seed = config.mask.seed;

        DenseTensor result = b;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            SolveReport report;
            if (plan.tv) {
                GtpgEngine<GradientField> engine(make_tv_problem(p_e, b, mu, omega), cfg);
                report = run_one(engine, cfg, b, plan, config);
                rec.config_json = config_snapshot(config, name, mu, engine.alpha(), epsilon_used);
            } else {
                GtpgEngine<DenseTensor> engine(make_l1_problem(p_e, b, mu, omega), cfg);
                report = run_one(engine, cfg, b, plan, config);
                rec.config_json = config_snapshot(config, name, mu, engine.alpha(), epsilon_used);
            }
            result = report.final;
            rec.outer_iters = report.iterates_used;
            rec.cycles = report.cycles;
        } catch (const DivergenceError& e) {
            rec.diverged = true;
            result = e.report.final;
            rec.outer_iters = e.report.iterates_used;
            rec.cycles = e.report.cycles;
        }
        rec.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        rec.psnr_db = psnr(result, original);
        rec.rel_error = relative_error(result, original);
        records.push_back(rec);
        if (recovered)
            recovered->push_back(std::move(result));
    }
    return records;
}

} // namespace tenprox
