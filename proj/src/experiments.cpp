#include "geomrazor/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "geomrazor/parallel.hpp"
#include "geomrazor/rng.hpp"

namespace geomrazor {

Dataset make_1d_dataset(std::size_t n_points, double x_lo, double x_hi,
                        const std::string& generator, std::uint64_t seed) {
    if (n_points < 2) throw std::invalid_argument("make_1d_dataset: n_points >= 2 required");
    if (!(x_lo < x_hi)) throw std::invalid_argument("make_1d_dataset: empty x range");
    if (generator != "random_smooth" && generator != "fixed_seeded")
        throw std::invalid_argument("make_1d_dataset: unknown generator \"" + generator + "\"");

    Rng rng(seed);
    std::vector<double> xs(n_points);
    if (generator == "fixed_seeded") {
        for (std::size_t i = 0; i < n_points; ++i)
            xs[i] = x_lo + (x_hi - x_lo) * static_cast<double>(i) /
                               static_cast<double>(n_points - 1);
    } else {
        for (;;) {
            for (double& x : xs) x = rng.uniform(x_lo, x_hi);
            std::sort(xs.begin(), xs.end());
            if (std::adjacent_find(xs.begin(), xs.end()) == xs.end()) break;
        }
    }

    std::vector<Example> points;
    points.reserve(n_points);
    if (generator == "fixed_seeded") {
        for (double x : xs) points.push_back({Vector{x}, Vector{rng.uniform(-1.0, 1.0)}});
    } else {
        // Three seeded sinusoids define the smooth target.
        double amp[3], freq[3], phase[3];
        for (int k = 0; k < 3; ++k) {
            amp[k] = rng.uniform(0.2, 0.8);
            freq[k] = rng.uniform(0.5, 2.5);
            phase[k] = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
        }
        for (double x : xs) {
            double y = 0.0;
            for (int k = 0; k < 3; ++k) y += amp[k] * std::sin(freq[k] * x + phase[k]);
            y += 0.05 * rng.normal();
            points.push_back({Vector{x}, Vector{y}});
        }
    }
    return make_dataset(std::move(points));
}

std::pair<Dataset, Dataset> make_classification_dataset(const std::string& kind, std::size_t n,
                                                        double noise, std::uint64_t seed) {
    if (n < 10) throw std::invalid_argument("make_classification_dataset: n >= 10 required");
    if (noise < 0.0) throw std::invalid_argument("make_classification_dataset: negative noise");

    Rng rng(seed);
    std::vector<Example> all;
    all.reserve(n);
    const std::size_t n0 = n - n / 2;
    const std::size_t n1 = n / 2;
    const double pi = 3.14159265358979323846;

    auto one_hot = [](std::size_t cls) {
        Vector y(2, 0.0);
        y[cls] = 1.0;
        return y;
    };

    if (kind == "two_moons") {
        for (std::size_t i = 0; i < n0; ++i) {
            const double t = pi * static_cast<double>(i) / static_cast<double>(n0 - 1);
            Vector x{std::cos(t) + noise * rng.normal(), std::sin(t) + noise * rng.normal()};
            all.push_back({std::move(x), one_hot(0)});
        }
        for (std::size_t i = 0; i < n1; ++i) {
            const double t = pi * static_cast<double>(i) / static_cast<double>(n1 - 1);
            Vector x{1.0 - std::cos(t) + noise * rng.normal(),
                     0.5 - std::sin(t) + noise * rng.normal()};
            all.push_back({std::move(x), one_hot(1)});
        }
    } else if (kind == "gaussian_blobs") {
        const double cx[2] = {-2.0, 2.0};
        for (std::size_t i = 0; i < n0; ++i) {
            Vector x{cx[0] + noise * rng.normal(), noise * rng.normal()};
            all.push_back({std::move(x), one_hot(0)});
        }
        for (std::size_t i = 0; i < n1; ++i) {
            Vector x{cx[1] + noise * rng.normal(), noise * rng.normal()};
            all.push_back({std::move(x), one_hot(1)});
        }
    } else {
        throw std::invalid_argument("make_classification_dataset: unknown kind \"" + kind + "\"");
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);

    const std::size_t n_train = (n * 8) / 10;
    std::vector<Example> train, val;
    for (std::size_t i = 0; i < n; ++i) {
        (i < n_train ? train : val).push_back(all[order[i]]);
    }
    return {make_dataset(std::move(train)), make_dataset(std::move(val))};
}

double classification_accuracy(const Mlp& mlp, const Dataset& data) {
    std::size_t correct = 0;
    for (const Example& e : data.points) {
        const Vector out = forward(mlp, e.x).output;
        std::size_t pred = 0, truth = 0;
        for (std::size_t i = 1; i < out.dim(); ++i)
            if (out[i] > out[pred]) pred = i;
        for (std::size_t i = 1; i < e.y.dim(); ++i)
            if (e.y[i] > e.y[truth]) truth = i;
        if (pred == truth) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(data.points.size());
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;  // average 1-based rank
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

double spearman_rank_correlation(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2)
        throw std::invalid_argument("spearman_rank_correlation: need two equal-length series");
    const std::vector<double> ra = average_ranks(a);
    const std::vector<double> rb = average_ranks(b);
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += ra[i];
        mb += rb[i];
    }
    ma /= n;
    mb /= n;
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        cov += (ra[i] - ma) * (rb[i] - mb);
        va += (ra[i] - ma) * (ra[i] - ma);
        vb += (rb[i] - mb) * (rb[i] - mb);
    }
    if (va == 0.0 || vb == 0.0)
        throw std::invalid_argument("spearman_rank_correlation: a series is constant");
    return cov / std::sqrt(va * vb);
}

namespace {

Dataset dataset_for(const ExperimentSpec& spec) {
    const auto* reg = std::get_if<Regression1dSpec>(&spec.dataset);
    if (!reg)
        throw std::invalid_argument("run_regression_1d: spec requires a regression_1d dataset");
    return make_1d_dataset(reg->n_points, reg->x_lo, reg->x_hi, reg->generator, reg->seed);
}

std::pair<double, double> data_interval(const Dataset& data) {
    double lo = data.points.front().x[0], hi = lo;
    for (const Example& e : data.points) {
        lo = std::min(lo, e.x[0]);
        hi = std::max(hi, e.x[0]);
    }
    return {lo, hi};
}

Snapshot take_snapshot(const Mlp& mlp, std::size_t step, double lo, double hi) {
    constexpr std::size_t kGridPoints = 512;
    Snapshot snap;
    snap.step = step;
    snap.curve.reserve(kGridPoints);
    for (std::size_t i = 0; i < kGridPoints; ++i) {
        const double x =
            lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(kGridPoints - 1);
        snap.curve.emplace_back(x, forward(mlp, Vector{x}).output[0]);
    }
    return snap;
}

}  // namespace

RegressionResult run_regression_1d(const ExperimentSpec& spec) {
    const Dataset data = dataset_for(spec);
    const auto [lo, hi] = data_interval(data);
    Mlp initial = make_mlp(1, spec.model.hidden, 1, spec.model.activation, spec.model.init_seed);

    const std::set<std::size_t> wanted(spec.snapshot_steps.begin(), spec.snapshot_steps.end());
    std::vector<Snapshot> snapshots;
    TrainHooks hooks;
    hooks.on_step = [&](std::size_t step, const Mlp& net) {
        if (wanted.count(step)) snapshots.push_back(take_snapshot(net, step, lo, hi));
    };

    TrainResult trained = sgd_train(std::move(initial), data, spec.train, hooks);

    RegressionResult result{std::move(trained.records), std::move(snapshots), {},
                            std::move(trained.final_mlp)};
    result.summary.final_train_loss = loss_value(result.final_mlp, data, spec.train.loss);
    result.summary.final_arc_length = arc_length_1d(result.final_mlp, Interval{lo, hi}, 4096);
    result.summary.chord_length = chord_path_length(data);
    result.summary.arc_chord_ratio = result.summary.final_arc_length / result.summary.chord_length;
    return result;
}

SweepResult run_lr_sweep(const ExperimentSpec& spec) {
    if (!spec.sweep || spec.sweep->learning_rates.empty() || spec.sweep->seeds.empty())
        throw std::invalid_argument("run_lr_sweep: spec.sweep with learning rates and seeds required");
    const auto* cls = std::get_if<ClassificationSpec>(&spec.dataset);
    if (!cls) throw std::invalid_argument("run_lr_sweep: spec requires a classification dataset");

    const auto [train, val] = make_classification_dataset(cls->kind, cls->n, cls->noise, cls->seed);

    struct Cell {
        double lr;
        std::uint64_t seed;
    };
    std::vector<Cell> grid;
    for (double lr : spec.sweep->learning_rates)
        for (std::uint64_t s : spec.sweep->seeds) grid.push_back({lr, s});
    std::sort(grid.begin(), grid.end(), [](const Cell& a, const Cell& b) {
        return a.lr < b.lr || (a.lr == b.lr && a.seed < b.seed);
    });

    SweepResult result;
    result.rows.resize(grid.size());

    parallel_for(grid.size(), [&](std::size_t idx) {
        const Cell& cell = grid[idx];
        SweepRow row;
        row.learning_rate = cell.lr;
        row.seed = cell.seed;

        TrainConfig config = spec.train;
        config.learning_rate = cell.lr;
        config.seed = cell.seed;

        Mlp initial = make_mlp(train.input_dim, spec.model.hidden, train.output_dim,
                               spec.model.activation, cell.seed);

        double best = -1.0;
        TrainHooks hooks;
        hooks.on_step = [&](std::size_t step, const Mlp& net) {
            if (step % config.track_every != 0 && step != config.steps) return;
            const double acc = classification_accuracy(net, val);
            if (acc > best) {
                best = acc;
                row.best_val_accuracy = acc;
                row.step_of_best = step;
                row.discrete_de_at_best = discrete_dirichlet_energy(net, train);
                row.slope_at_best = loss_surface_slope(net, train, config.loss);
            }
        };

        try {
            sgd_train(std::move(initial), train, config, hooks);
        } catch (const TrainingDivergedError&) {
            row.diverged = true;
        }
        result.rows[idx] = std::move(row);
    });

    return result;
}

}  // namespace geomrazor
