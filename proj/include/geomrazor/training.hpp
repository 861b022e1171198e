#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "geomrazor/complexity.hpp"
#include "geomrazor/network.hpp"

namespace geomrazor {

enum class LossKind { HalfSquaredError, SoftmaxCrossEntropy };

const char* loss_name(LossKind kind);
LossKind loss_from_name(const std::string& name);

struct TrainConfig {
    double learning_rate = 0.0;
    std::size_t steps = 0;
    std::size_t batch_size = 0;  // 0: full batch
    std::uint64_t seed = 0;
    std::size_t track_every = 100;
    LossKind loss = LossKind::HalfSquaredError;
};

struct TrainRecord {
    std::size_t step = 0;
    double train_loss = 0.0;
    double discrete_de = 0.0;
    double igr_penalty = 0.0;
    double modified_loss = 0.0;  // train_loss + learning_rate * igr_penalty
    std::optional<double> arc_length;  // 1 → 1 networks only
    double param_norm_sq = 0.0;
};

struct TrainHooks {
    // Called with the freshly initialized network at step 0 and after every
    // SGD update.  Receives a read-only snapshot.
    std::function<void(std::size_t step, const Mlp& mlp)> on_step;
};

class TrainingDivergedError : public std::runtime_error {
public:
    TrainingDivergedError(std::string message, TrainRecord last_good, std::size_t at_step)
        : std::runtime_error(std::move(message)),
          last_good(std::move(last_good)),
          at_step(at_step) {}

    TrainRecord last_good;
    std::size_t at_step;
};

/// Mean per-example loss over the dataset.
double loss_value(const Mlp& mlp, const Dataset& data, LossKind loss);

/// Exact gradient of the single-example loss, flattened in canonical
/// parameter order.
Vector per_example_loss_gradient(const Mlp& mlp, const Vector& x, const Vector& y, LossKind loss);

/// For a scalar network under the half-squared error: the loss gradient both
/// directly and as residual × ∇_θ f.  The two must agree.
struct ResidualDecomposition {
    Vector direct;
    Vector composed;
};
ResidualDecomposition residual_decomposition_check(const Mlp& mlp, const Vector& x,
                                                   const Vector& y);

/// (1/(4|D|)) Σ ‖∇_θ L(x,θ)‖² over the data points — the learning-rate-free
/// factor of the implicit gradient-regularization penalty.
double igr_penalty(const Mlp& mlp, const Dataset& data, LossKind loss);

/// ‖∇_θ (mean loss)‖² — squared norm of the full-batch loss gradient.
double loss_surface_slope(const Mlp& mlp, const Dataset& data, LossKind loss);

TrainRecord make_train_record(const Mlp& mlp, const Dataset& data, const TrainConfig& config,
                              std::size_t step);

struct TrainResult {
    Mlp final_mlp;
    std::vector<TrainRecord> records;
};

/// Vanilla minibatch SGD: no momentum, no weight decay, no explicit
/// regularization.  Minibatches are drawn by a seeded shuffle each epoch.
/// Records are emitted at step 0, every track_every steps, and at the final
/// step; all metrics are computed on the full dataset.  Deterministic given
/// (seed, config, initial network).
TrainResult sgd_train(Mlp mlp, const Dataset& data, const TrainConfig& config,
                      const TrainHooks& hooks = {});

}  // namespace geomrazor
