#include "geomrazor/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "geomrazor/rng.hpp"

namespace geomrazor {

const char* loss_name(LossKind kind) {
    switch (kind) {
        case LossKind::HalfSquaredError: return "half_squared_error";
        case LossKind::SoftmaxCrossEntropy: return "softmax_cross_entropy";
    }
    throw std::invalid_argument("loss_name: unknown kind");
}

LossKind loss_from_name(const std::string& name) {
    if (name == "half_squared_error") return LossKind::HalfSquaredError;
    if (name == "softmax_cross_entropy") return LossKind::SoftmaxCrossEntropy;
    throw std::invalid_argument("unknown loss \"" + name + "\"");
}

namespace {

void require_one_hot(const Vector& y) {
    std::size_t ones = 0;
    for (double v : y.data) {
        if (v == 1.0) {
            ++ones;
        } else if (v != 0.0) {
            throw std::invalid_argument("cross-entropy targets must be one-hot");
        }
    }
    if (ones != 1) throw std::invalid_argument("cross-entropy targets must be one-hot");
}

std::size_t one_hot_index(const Vector& y) {
    require_one_hot(y);
    for (std::size_t i = 0; i < y.dim(); ++i)
        if (y[i] == 1.0) return i;
    throw std::logic_error("one_hot_index: unreachable");
}

Vector softmax(const Vector& logits) {
    double m = logits[0];
    for (double v : logits.data) m = std::max(m, v);
    Vector p(logits.dim());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.dim(); ++i) {
        p[i] = std::exp(logits[i] - m);
        sum += p[i];
    }
    for (std::size_t i = 0; i < p.dim(); ++i) p[i] /= sum;
    return p;
}

double example_loss(const Vector& prediction, const Vector& y, LossKind loss) {
    switch (loss) {
        case LossKind::HalfSquaredError: {
            double acc = 0.0;
            for (std::size_t i = 0; i < y.dim(); ++i) {
                const double d = prediction[i] - y[i];
                acc += d * d;
            }
            return 0.5 * acc;
        }
        case LossKind::SoftmaxCrossEntropy: {
            const std::size_t k = one_hot_index(y);
            double m = prediction[0];
            for (double v : prediction.data) m = std::max(m, v);
            double sum = 0.0;
            for (double v : prediction.data) sum += std::exp(v - m);
            return std::log(sum) - (prediction[k] - m);
        }
    }
    throw std::invalid_argument("example_loss: unknown kind");
}

// dL/df for one example.
Vector loss_output_gradient(const Vector& prediction, const Vector& y, LossKind loss) {
    switch (loss) {
        case LossKind::HalfSquaredError: {
            Vector g(prediction.dim());
            for (std::size_t i = 0; i < g.dim(); ++i) g[i] = prediction[i] - y[i];
            return g;
        }
        case LossKind::SoftmaxCrossEntropy: {
            require_one_hot(y);
            Vector g = softmax(prediction);
            for (std::size_t i = 0; i < g.dim(); ++i) g[i] -= y[i];
            return g;
        }
    }
    throw std::invalid_argument("loss_output_gradient: unknown kind");
}

void check_shapes(const Mlp& mlp, const Dataset& data) {
    if (data.input_dim != mlp.input_dim() || data.output_dim != mlp.output_dim())
        throw std::invalid_argument("dataset dimensions do not match the network");
}

}  // namespace

double loss_value(const Mlp& mlp, const Dataset& data, LossKind loss) {
    check_shapes(mlp, data);
    double acc = 0.0;
    for (const Example& e : data.points)
        acc += example_loss(forward(mlp, e.x).output, e.y, loss);
    return acc / static_cast<double>(data.points.size());
}

Vector per_example_loss_gradient(const Mlp& mlp, const Vector& x, const Vector& y,
                                 LossKind loss) {
    const ForwardTrace trace = forward(mlp, x);
    const Vector out_grad = loss_output_gradient(trace.output, y, loss);
    return flatten_gradients(backprop_output_gradient(mlp, trace, out_grad));
}

ResidualDecomposition residual_decomposition_check(const Mlp& mlp, const Vector& x,
                                                   const Vector& y) {
    if (mlp.output_dim() != 1)
        throw std::invalid_argument(
            "residual_decomposition_check: requires a scalar-output network");
    ResidualDecomposition result;
    result.direct = per_example_loss_gradient(mlp, x, y, LossKind::HalfSquaredError);

    const ForwardTrace trace = forward(mlp, x);
    const double residual = trace.output[0] - y[0];
    const JacobianBundle bundle = parameter_gradients(mlp, trace, 0);
    result.composed = scale(flatten_gradients(bundle), residual);
    return result;
}

double igr_penalty(const Mlp& mlp, const Dataset& data, LossKind loss) {
    check_shapes(mlp, data);
    double acc = 0.0;
    for (const Example& e : data.points)
        acc += norm_sq(per_example_loss_gradient(mlp, e.x, e.y, loss));
    return acc / (4.0 * static_cast<double>(data.points.size()));
}

double loss_surface_slope(const Mlp& mlp, const Dataset& data, LossKind loss) {
    check_shapes(mlp, data);
    Vector mean;
    for (const Example& e : data.points) {
        Vector g = per_example_loss_gradient(mlp, e.x, e.y, loss);
        if (mean.dim() == 0) {
            mean = std::move(g);
        } else {
            for (std::size_t i = 0; i < mean.dim(); ++i) mean[i] += g[i];
        }
    }
    const double inv = 1.0 / static_cast<double>(data.points.size());
    for (std::size_t i = 0; i < mean.dim(); ++i) mean[i] *= inv;
    return norm_sq(mean);
}

TrainRecord make_train_record(const Mlp& mlp, const Dataset& data, const TrainConfig& config,
                              std::size_t step) {
    TrainRecord rec;
    rec.step = step;
    rec.train_loss = loss_value(mlp, data, config.loss);
    rec.discrete_de = discrete_dirichlet_energy(mlp, data);
    rec.igr_penalty = igr_penalty(mlp, data, config.loss);
    rec.modified_loss = rec.train_loss + config.learning_rate * rec.igr_penalty;
    rec.param_norm_sq = parameter_norm_sq(mlp);
    if (mlp.input_dim() == 1 && mlp.output_dim() == 1) {
        double lo = data.points.front().x[0], hi = lo;
        for (const Example& e : data.points) {
            lo = std::min(lo, e.x[0]);
            hi = std::max(hi, e.x[0]);
        }
        if (lo < hi) rec.arc_length = arc_length_1d(mlp, Interval{lo, hi}, 1024);
    }
    return rec;
}

TrainResult sgd_train(Mlp mlp, const Dataset& data, const TrainConfig& config,
                      const TrainHooks& hooks) {
    check_shapes(mlp, data);
    const std::size_t n = data.points.size();
    const std::size_t batch = config.batch_size == 0 ? n : config.batch_size;
    if (batch > n)
        throw std::invalid_argument("sgd_train: batch_size exceeds the dataset size");
    if (config.learning_rate < 0.0)
        throw std::invalid_argument("sgd_train: negative learning rate");
    if (config.track_every == 0)
        throw std::invalid_argument("sgd_train: track_every must be >= 1");

    TrainResult result{std::move(mlp), {}};
    Mlp& net = result.final_mlp;

    Rng rng(config.seed);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::size_t cursor = n;  // forces a shuffle before the first batch

    auto record_at = [&](std::size_t step) {
        TrainRecord rec = make_train_record(net, data, config, step);
        if (!std::isfinite(rec.train_loss)) {
            TrainRecord last = result.records.empty() ? TrainRecord{} : result.records.back();
            throw TrainingDivergedError(
                "sgd_train: loss is not finite at step " + std::to_string(step), last, step);
        }
        result.records.push_back(std::move(rec));
    };

    record_at(0);
    if (hooks.on_step) hooks.on_step(0, net);

    // Accumulators sized once; reused each step.
    std::vector<Matrix> wsum;
    std::vector<Vector> bsum;
    for (const Layer& l : net.layers()) {
        wsum.emplace_back(l.fan_out(), l.fan_in(), 0.0);
        bsum.emplace_back(l.fan_out(), 0.0);
    }

    for (std::size_t step = 1; step <= config.steps; ++step) {
        for (std::size_t k = 0; k < net.depth(); ++k) {
            std::fill(wsum[k].data.begin(), wsum[k].data.end(), 0.0);
            std::fill(bsum[k].data.begin(), bsum[k].data.end(), 0.0);
        }

        for (std::size_t b = 0; b < batch; ++b) {
            if (cursor >= n) {
                rng.shuffle(order);
                cursor = 0;
            }
            const Example& e = data.points[order[cursor++]];
            const ForwardTrace trace = forward(net, e.x);
            const Vector out_grad = loss_output_gradient(trace.output, e.y, config.loss);
            const JacobianBundle g = backprop_output_gradient(net, trace, out_grad);
            for (std::size_t k = 0; k < net.depth(); ++k) {
                for (std::size_t j = 0; j < wsum[k].data.size(); ++j)
                    wsum[k].data[j] += g.weight_grads[k].data[j];
                for (std::size_t j = 0; j < bsum[k].dim(); ++j)
                    bsum[k][j] += g.bias_grads[k][j];
            }
        }

        const double scale = config.learning_rate / static_cast<double>(batch);
        for (std::size_t k = 0; k < net.depth(); ++k) {
            Layer& layer = net.layer(k);
            for (std::size_t j = 0; j < layer.weight.data.size(); ++j)
                layer.weight.data[j] -= scale * wsum[k].data[j];
            for (std::size_t j = 0; j < layer.bias.dim(); ++j)
                layer.bias[j] -= scale * bsum[k][j];
        }

        if (step % config.track_every == 0 || step == config.steps) record_at(step);
        if (hooks.on_step) hooks.on_step(step, net);
    }

    return result;
}

}  // namespace geomrazor
