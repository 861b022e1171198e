#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "geomrazor/complexity.hpp"
#include "geomrazor/experiments.hpp"
#include "geomrazor/io.hpp"
#include "geomrazor/plot.hpp"
#include "geomrazor/theorem.hpp"

namespace fs = std::filesystem;
using namespace geomrazor;

namespace {

void ensure_out_dir(const std::string& out) {
    fs::create_directories(out);
}

std::string join(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

PolytopeMode mode_from_name(const std::string& name) {
    if (name == "auto") return PolytopeMode::Auto;
    if (name == "interval") return PolytopeMode::Interval;
    if (name == "box") return PolytopeMode::Box;
    if (name == "hull") return PolytopeMode::Hull;
    throw std::invalid_argument("unknown polytope mode \"" + name + "\"");
}

int run_measure(const std::string& model_path, const std::string& data_path,
                const std::string& mode, std::size_t grid, std::size_t mc_samples,
                std::uint64_t mc_seed, std::size_t arc_segments, const std::string& out) {
    const Mlp mlp = load_mlp(model_path);
    const Dataset data = load_dataset(data_path);
    const QuadratureSpec quad = data.input_dim == 1 ? QuadratureSpec(Grid1D{grid})
                                                    : QuadratureSpec(MonteCarlo{mc_samples, mc_seed});
    const ComplexityReport report =
        measure_complexity(mlp, data, mode_from_name(mode), quad, arc_segments);
    ensure_out_dir(out);
    write_text_file(join(out, "report.json"), report_to_json_text(report) + "\n");
    std::cout << "wrote " << join(out, "report.json") << "\n";
    return 0;
}

int run_check_theorem(const std::string& model_path, const std::string& inputs_path, double eps,
                      const std::string& out) {
    const Mlp mlp = load_mlp(model_path);
    const std::vector<Vector> inputs = load_inputs(inputs_path);

    TheoremOptions opts;
    opts.eps = eps;

    nlohmann::json verdicts = nlohmann::json::array();
    std::size_t satisfied = 0, total = 0;
    for (const Vector& x : inputs) {
        for (std::size_t k = 0; k < mlp.output_dim(); ++k) {
            const TheoremVerdict verdict = check_theorem(mlp, x, k, opts);
            verdicts.push_back(nlohmann::json::parse(verdict_to_json_text(verdict)));
            ++total;
            if (verdict.slack >= -1e-9 * std::abs(verdict.rhs)) ++satisfied;
        }
    }
    ensure_out_dir(out);
    write_text_file(join(out, "verdicts.json"), verdicts.dump(2) + "\n");
    std::cout << satisfied << "/" << total << " checks satisfied; wrote "
              << join(out, "verdicts.json") << "\n";
    return 0;
}

int run_train(const std::string& spec_path, const std::string& out) {
    const ExperimentSpec spec = parse_spec(spec_path);
    Dataset data;
    if (const auto* reg = std::get_if<Regression1dSpec>(&spec.dataset)) {
        data = make_1d_dataset(reg->n_points, reg->x_lo, reg->x_hi, reg->generator, reg->seed);
    } else {
        const auto& cls = std::get<ClassificationSpec>(spec.dataset);
        data = make_classification_dataset(cls.kind, cls.n, cls.noise, cls.seed).first;
    }
    Mlp initial = make_mlp(data.input_dim, spec.model.hidden, data.output_dim,
                           spec.model.activation, spec.model.init_seed);
    const TrainResult result = sgd_train(std::move(initial), data, spec.train);
    ensure_out_dir(out);
    write_train_records_csv(join(out, "records.csv"), result.records);
    save_mlp(result.final_mlp, join(out, "model.json"));
    std::cout << "wrote " << join(out, "records.csv") << " and " << join(out, "model.json") << "\n";
    return 0;
}

int run_regress1d(const std::string& spec_path, const std::string& out) {
    const ExperimentSpec spec = parse_spec(spec_path);
    const RegressionResult result = run_regression_1d(spec);
    ensure_out_dir(out);
    write_train_records_csv(join(out, "records.csv"), result.records);
    for (const Snapshot& snap : result.snapshots)
        write_snapshot_csv(join(out, "snapshot_" + std::to_string(snap.step) + ".csv"), snap);
    save_mlp(result.final_mlp, join(out, "model.json"));

    nlohmann::json summary;
    summary["final_train_loss"] = result.summary.final_train_loss;
    summary["final_arc_length"] = result.summary.final_arc_length;
    summary["chord_length"] = result.summary.chord_length;
    summary["arc_chord_ratio"] = result.summary.arc_chord_ratio;
    write_text_file(join(out, "summary.json"), summary.dump(2) + "\n");
    std::cout << "arc/chord ratio " << result.summary.arc_chord_ratio << ", final loss "
              << result.summary.final_train_loss << "; outputs in " << out << "\n";
    return 0;
}

int run_sweep(const std::string& spec_path, const std::string& out) {
    const ExperimentSpec spec = parse_spec(spec_path);
    const SweepResult result = run_lr_sweep(spec);
    ensure_out_dir(out);
    write_sweep_csv(join(out, "sweep.csv"), result);

    // Spearman correlation of lr against the per-lr mean of each metric,
    // excluding diverged runs.
    std::vector<double> lrs;
    std::vector<double> mean_de, mean_slope;
    for (const SweepRow& row : result.rows) {
        if (row.diverged) continue;
        if (lrs.empty() || lrs.back() != row.learning_rate) {
            lrs.push_back(row.learning_rate);
            mean_de.push_back(0.0);
            mean_slope.push_back(0.0);
        }
    }
    std::vector<std::size_t> counts(lrs.size(), 0);
    for (const SweepRow& row : result.rows) {
        if (row.diverged) continue;
        for (std::size_t i = 0; i < lrs.size(); ++i) {
            if (lrs[i] == row.learning_rate) {
                mean_de[i] += row.discrete_de_at_best;
                mean_slope[i] += row.slope_at_best;
                ++counts[i];
            }
        }
    }
    nlohmann::json summary;
    if (lrs.size() >= 2) {
        for (std::size_t i = 0; i < lrs.size(); ++i) {
            mean_de[i] /= static_cast<double>(counts[i]);
            mean_slope[i] /= static_cast<double>(counts[i]);
        }
        summary["spearman_lr_vs_mean_de"] = spearman_rank_correlation(lrs, mean_de);
        summary["spearman_lr_vs_mean_slope"] = spearman_rank_correlation(lrs, mean_slope);
    }
    summary["rows"] = result.rows.size();
    write_text_file(join(out, "summary.json"), summary.dump(2) + "\n");
    std::cout << "wrote " << join(out, "sweep.csv") << "\n";
    return 0;
}

int run_plot(const std::string& csv, const std::string& x, const std::string& y_list,
             const std::string& out_svg) {
    std::vector<std::string> ys;
    std::stringstream ss(y_list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) ys.push_back(item);
    }
    emit_plot(csv, x, ys, out_svg);
    std::cout << "wrote " << out_svg << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"geomrazor: geometric complexity measurements for small MLPs"};
    app.require_subcommand(1);

    std::string model_path, data_path, inputs_path, spec_path, out_dir = "out";
    std::string csv_path, x_column, y_columns, svg_path;
    std::string mode = "auto";
    std::size_t grid = 4096, mc_samples = 20000, arc_segments = 4096;
    std::uint64_t mc_seed = 1;
    double eps = 1e-9;

    auto* measure = app.add_subcommand("measure", "complexity report for a checkpoint + dataset");
    measure->add_option("--model", model_path)->required();
    measure->add_option("--data", data_path)->required();
    measure->add_option("--mode", mode, "polytope mode: auto|interval|box|hull");
    measure->add_option("--grid", grid, "trapezoid segments for 1-D features");
    measure->add_option("--mc", mc_samples, "Monte Carlo samples for d >= 2");
    measure->add_option("--mc-seed", mc_seed);
    measure->add_option("--arc-segments", arc_segments);
    measure->add_option("--out", out_dir)->required();

    auto* check = app.add_subcommand("check-theorem", "gradient-norm inequality report");
    check->add_option("--model", model_path)->required();
    check->add_option("--inputs", inputs_path)->required();
    check->add_option("--eps", eps, "degeneracy threshold");
    check->add_option("--out", out_dir)->required();

    auto* train = app.add_subcommand("train", "train a model from an experiment spec");
    train->add_option("--spec", spec_path)->required();
    train->add_option("--out", out_dir)->required();

    auto* regress = app.add_subcommand("regress1d", "1-D interpolation study");
    regress->add_option("--spec", spec_path)->required();
    regress->add_option("--out", out_dir)->required();

    auto* sweep = app.add_subcommand("sweep", "learning-rate sweep");
    sweep->add_option("--spec", spec_path)->required();
    sweep->add_option("--out", out_dir)->required();

    auto* plot = app.add_subcommand("plot", "render CSV columns as an SVG chart");
    plot->add_option("--csv", csv_path)->required();
    plot->add_option("--x", x_column)->required();
    plot->add_option("--y", y_columns, "comma-separated y columns")->required();
    plot->add_option("--out", svg_path)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (measure->parsed())
            return run_measure(model_path, data_path, mode, grid, mc_samples, mc_seed,
                               arc_segments, out_dir);
        if (check->parsed()) return run_check_theorem(model_path, inputs_path, eps, out_dir);
        if (train->parsed()) return run_train(spec_path, out_dir);
        if (regress->parsed()) return run_regress1d(spec_path, out_dir);
        if (sweep->parsed()) return run_sweep(spec_path, out_dir);
        if (plot->parsed()) return run_plot(csv_path, x_column, y_columns, svg_path);
    } catch (const std::exception& e) {
        const char* type = "error";
        if (dynamic_cast<const SpecValidationError*>(&e)) {
            type = "spec_validation";
        } else if (dynamic_cast<const DegeneratePolytopeError*>(&e)) {
            type = "degenerate_polytope";
        } else if (dynamic_cast<const QuadratureError*>(&e)) {
            type = "quadrature";
        } else if (dynamic_cast<const TrainingDivergedError*>(&e)) {
            type = "training_diverged";
        } else if (dynamic_cast<const PowerIterationError*>(&e)) {
            type = "power_iteration";
        } else if (dynamic_cast<const DegenerateLayerError*>(&e)) {
            type = "degenerate_layer";
        } else if (dynamic_cast<const std::invalid_argument*>(&e)) {
            type = "invalid_argument";
        }
        nlohmann::json err;
        err["error"] = {{"type", type}, {"message", e.what()}};
        std::cerr << err.dump() << "\n";
        return 1;
    }
    return 0;
}
