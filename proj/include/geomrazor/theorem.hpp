#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "geomrazor/network.hpp"

namespace geomrazor {

class DegenerateLayerError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct TheoremOptions {
    double eps = 1e-9;               // degeneracy threshold
    double spectral_tol = 1e-11;     // tolerance for the spectral norms
    std::size_t spectral_max_iter = 1'000'000;
};

/// Per-layer quantities entering the gradient-norm inequality.  The layer's
/// contribution to the bound splits into a weight term
/// ‖∇_x f‖²·‖h_i‖²/(‖w_i‖·‖h_i′‖)² and a bias term ‖∇_x f‖²/(‖w_i‖·‖h_i′‖)².
/// A layer is degenerate when the denominator ‖w_i‖·‖h_i′‖ falls below eps
/// or ‖h_i‖² falls below eps²; degenerate terms are reported as 0.
struct LayerDiagnostics {
    std::size_t layer_index = 0;
    double w_spectral = 0.0;       // ‖w_i‖ (spectral)
    double h_norm_sq = 0.0;        // ‖h_i(x)‖²
    double hprime_opnorm = 0.0;    // operator norm of h_i′(x)
    double hprime_fronorm = 0.0;   // Frobenius norm of h_i′(x)
    double a_i = 0.0;              // ‖w_i‖·‖h_i′(x)‖ (operator norm)
    bool degenerate = false;
    std::string degenerate_reason;
    double weight_term = 0.0;
    double bias_term = 0.0;
};

struct TheoremVerdict {
    double lhs = 0.0;   // ‖∇_x f_k‖² · Σ (1+‖h_i‖²)/(‖w_i‖‖h_i′‖)², non-degenerate layers
    double rhs = 0.0;   // ‖∇_θ f_k‖²
    double slack = 0.0; // rhs − lhs
    double grad_x_norm_sq = 0.0;
    std::vector<LayerDiagnostics> per_layer;
    std::vector<std::pair<std::size_t, std::string>> skipped_layers;
    std::size_t output_index = 0;
    bool all_layers_degenerate = false;
};

LayerDiagnostics layer_diagnostics(const Mlp& mlp, const ForwardTrace& trace, std::size_t i,
                                   std::size_t output_index, const TheoremOptions& opts = {});

/// Evaluates the inequality at x for the selected scalar output component.
/// Degenerate layers are dropped from the left-hand sum and listed in
/// skipped_layers; dropping nonnegative terms preserves the direction of the
/// bound.
TheoremVerdict check_theorem(const Mlp& mlp, const Vector& x, std::size_t output_index,
                             const TheoremOptions& opts = {});

struct LemmaCheck {
    double lhs = 0.0;
    double rhs = 0.0;
};

/// Lemma for the layer weights: ‖∇_x f‖²·(‖h_i‖/(‖w_i‖‖h_i′‖))² ≤ ‖∇_{w_i} f‖²_F.
/// Throws DegenerateLayerError when ‖w_i‖·‖h_i′‖ < eps.
LemmaCheck weight_lemma_check(const Mlp& mlp, const ForwardTrace& trace, std::size_t i,
                              std::size_t output_index, const TheoremOptions& opts = {});

/// Lemma for the biases: ‖∇_x f‖²/(‖w_i‖‖h_i′‖)² ≤ ‖∇_{b_i} f‖².
LemmaCheck bias_lemma_check(const Mlp& mlp, const ForwardTrace& trace, std::size_t i,
                            std::size_t output_index, const TheoremOptions& opts = {});

/// Rank-one weight perturbation u(δx) = (w_i h_i′(x) δx) h_iᵀ(x) / ‖h_i(x)‖²
/// that mimics an input perturbation at layer i to first order.
Matrix weight_perturbation(const Mlp& mlp, const ForwardTrace& trace, std::size_t i,
                           const Vector& delta_x, double eps = 1e-9);

/// Bias perturbation u(δx) = w_i h_i′(x) δx.
Vector bias_perturbation(const Mlp& mlp, const ForwardTrace& trace, std::size_t i,
                         const Vector& delta_x);

/// ‖f_{w_i + u(δx)}(x) − f(x + δx)‖ — the first-order equivalence residual.
double weight_perturbation_residual(const Mlp& mlp, const Vector& x, std::size_t i,
                                    const Vector& delta_x, double eps = 1e-9);
double bias_perturbation_residual(const Mlp& mlp, const Vector& x, std::size_t i,
                                  const Vector& delta_x);

struct PythagorasCheck {
    double total = 0.0;         // squared norm of the flattened parameter gradient
    double sum_of_parts = 0.0;  // Σ_i ‖∇_{w_i}f‖²_F + ‖∇_{b_i}f‖²
};

PythagorasCheck pythagoras_check(const JacobianBundle& bundle);

}  // namespace geomrazor
