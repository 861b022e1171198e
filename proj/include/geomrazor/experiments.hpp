#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "geomrazor/training.hpp"

namespace geomrazor {

struct Regression1dSpec {
    std::size_t n_points = 10;
    double x_lo = -1.0;
    double x_hi = 1.0;
    std::string generator = "random_smooth";  // or "fixed_seeded"
    std::uint64_t seed = 0;
};

struct ClassificationSpec {
    std::string kind;  // "two_moons" | "gaussian_blobs"
    std::size_t n = 1000;
    double noise = 0.1;
    std::uint64_t seed = 0;
};

using DatasetSpec = std::variant<Regression1dSpec, ClassificationSpec>;

struct ModelSpec {
    std::vector<std::size_t> hidden;
    Activation activation = Activation::Tanh;
    std::uint64_t init_seed = 0;
};

struct SweepSpec {
    std::vector<double> learning_rates;
    std::vector<std::uint64_t> seeds;
};

struct ExperimentSpec {
    std::string name = "experiment";
    DatasetSpec dataset;
    ModelSpec model;
    TrainConfig train;
    std::optional<SweepSpec> sweep;
    std::vector<std::size_t> snapshot_steps;
};

/// 1-D regression data with distinct x values.
///   random_smooth — x uniform in range (sorted), y from a seeded sum of
///                   three sinusoids plus 0.05 gaussian noise
///   fixed_seeded  — x evenly spaced over the range (endpoints included),
///                   y seeded uniform in [−1, 1]
Dataset make_1d_dataset(std::size_t n_points, double x_lo, double x_hi,
                        const std::string& generator, std::uint64_t seed);

/// Toy classification data with one-hot labels and a deterministic 80/20
/// train/validation split.
std::pair<Dataset, Dataset> make_classification_dataset(const std::string& kind, std::size_t n,
                                                        double noise, std::uint64_t seed);

double classification_accuracy(const Mlp& mlp, const Dataset& data);

/// Spearman rank correlation with average ranks for ties.
double spearman_rank_correlation(const std::vector<double>& a, const std::vector<double>& b);

struct Snapshot {
    std::size_t step = 0;
    std::vector<std::pair<double, double>> curve;  // (x, f(x)) on a 512-point grid
};

struct RegressionSummary {
    double final_train_loss = 0.0;
    double final_arc_length = 0.0;
    double chord_length = 0.0;
    double arc_chord_ratio = 0.0;
};

struct RegressionResult {
    std::vector<TrainRecord> records;
    std::vector<Snapshot> snapshots;
    RegressionSummary summary;
    Mlp final_mlp;
};

/// The 1-D interpolation study: trains per spec, captures dense snapshots at
/// the requested steps, and summarizes arc length against the chord path.
RegressionResult run_regression_1d(const ExperimentSpec& spec);

struct SweepRow {
    double learning_rate = 0.0;
    std::uint64_t seed = 0;
    double best_val_accuracy = 0.0;
    std::size_t step_of_best = 0;
    double discrete_de_at_best = 0.0;
    double slope_at_best = 0.0;
    bool diverged = false;
};

struct SweepResult {
    std::vector<SweepRow> rows;  // sorted by (learning_rate, seed)
};

/// Learning-rate sweep over a classification task.  For each (lr, seed) cell
/// the model trains per spec; validation accuracy is evaluated every
/// track_every steps, and the discrete Dirichlet energy and loss-surface
/// slope (both on the training set) are recorded at the earliest step that
/// attains the best validation accuracy.  Diverged runs are flagged.
SweepResult run_lr_sweep(const ExperimentSpec& spec);

}  // namespace geomrazor
