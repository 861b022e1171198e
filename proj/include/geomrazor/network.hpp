#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "geomrazor/linalg.hpp"

namespace geomrazor {

enum class Activation { Identity, ReLU, Tanh, Sigmoid };

double activation_apply(Activation a, double z);
/// Pointwise derivative.  ReLU uses the subgradient choice ReLU'(0) = 0.
double activation_derivative(Activation a, double z);
const char* activation_name(Activation a);
Activation activation_from_name(const std::string& name);

struct Layer {
    Matrix weight;  // fan_out × fan_in
    Vector bias;    // fan_out
    Activation activation = Activation::Identity;

    std::size_t fan_in() const { return weight.cols; }
    std::size_t fan_out() const { return weight.rows; }
};

/// Dense MLP.  Layers are stored input-side first, so layer 0 consumes the
/// raw input and the last layer produces the network output.
class Mlp {
public:
    explicit Mlp(std::vector<Layer> layers);

    std::size_t depth() const { return layers_.size(); }
    std::size_t input_dim() const { return layers_.front().fan_in(); }
    std::size_t output_dim() const { return layers_.back().fan_out(); }

    const Layer& layer(std::size_t i) const { return layers_.at(i); }
    Layer& layer(std::size_t i) { return layers_.at(i); }
    const std::vector<Layer>& layers() const { return layers_; }

    std::size_t parameter_count() const;

private:
    std::vector<Layer> layers_;
};

/// Glorot-uniform initialized MLP: hidden layers use `hidden_activation`,
/// the output layer is Identity.  Entries are uniform(−a, a) with
/// a = sqrt(6/(fan_in+fan_out)), drawn from a seeded stream.
Mlp make_mlp(std::size_t input_dim, const std::vector<std::size_t>& hidden,
             std::size_t output_dim, Activation hidden_activation,
             std::uint64_t init_seed);

/// Cached per-layer evaluation of a forward pass.
struct ForwardTrace {
    Vector input;
    std::vector<Vector> pre_activations;  // z_i = w_i h_i + b_i
    std::vector<Vector> activations;      // a_i(z_i)
    Vector output;                        // == activations.back()
};

ForwardTrace forward(const Mlp& mlp, const Vector& x);

/// h_i: the input reaching layer i, i.e. the composition of layers 0..i−1
/// applied to x.  h_0 is x itself.
const Vector& subnetwork_value(const ForwardTrace& trace, std::size_t i);

/// Jacobian of h_i at x (fan_in(i) × input_dim); identity for i = 0.
Matrix subnetwork_input_jacobian(const Mlp& mlp, const ForwardTrace& trace, std::size_t i);

/// Jacobians of h_0..h_{l−1} and of the full network, computed in one sweep.
/// Entry i is the h_i Jacobian; entry l is the full input-Jacobian.
std::vector<Matrix> all_subnetwork_jacobians(const Mlp& mlp, const ForwardTrace& trace);

/// Exact reverse-mode Jacobian of the network at trace.input
/// (output_dim × input_dim).
Matrix input_jacobian(const Mlp& mlp, const ForwardTrace& trace);

struct JacobianBundle {
    Matrix input_jacobian;  // 1 × input_dim when a single component is selected
    std::vector<Matrix> weight_grads;
    std::vector<Vector> bias_grads;
    std::optional<std::size_t> output_index;  // nullopt: gradients of ⟨out_grad, f⟩
};

/// Backpropagates an arbitrary output-side gradient through the trace.
JacobianBundle backprop_output_gradient(const Mlp& mlp, const ForwardTrace& trace,
                                        const Vector& out_grad);

/// Exact gradients of the scalar component f_k with respect to every weight
/// and bias; also fills the ∇_x f_k row.
JacobianBundle parameter_gradients(const Mlp& mlp, const ForwardTrace& trace,
                                   std::size_t output_index);

/// Σ_i ‖∇_{w_i} f‖²_F + ‖∇_{b_i} f‖², accumulated entry by entry in flat
/// parameter order (layer-major, weights row-major before bias).  Matches
/// the squared norm of flatten_gradients bitwise.
double param_grad_norm_sq(const JacobianBundle& bundle);

/// Canonical flat parameter order: per layer, weight entries row-major, then
/// bias entries.
Vector flatten_gradients(const JacobianBundle& bundle);
Vector flatten_parameters(const Mlp& mlp);
double parameter_norm_sq(const Mlp& mlp);

// ---- finite-difference oracles ---------------------------------------------
// Central differences, error O(step²).

Matrix fd_input_jacobian(const Mlp& mlp, const Vector& x, double step);
JacobianBundle fd_parameter_gradients(const Mlp& mlp, const Vector& x,
                                      std::size_t output_index, double step);

// ---- checkpoint format -------------------------------------------------------

std::string mlp_to_checkpoint(const Mlp& mlp);
Mlp mlp_from_checkpoint(const std::string& json_text);
void save_mlp(const Mlp& mlp, const std::string& path);
Mlp load_mlp(const std::string& path);

}  // namespace geomrazor
