#include "geomrazor/theorem.hpp"

#include <cmath>

namespace geomrazor {

namespace {

double grad_x_norm_sq_for(const Mlp& mlp, const ForwardTrace& trace, std::size_t output_index) {
    const JacobianBundle bundle = parameter_gradients(mlp, trace, output_index);
    return frobenius_norm_sq(bundle.input_jacobian);
}

LayerDiagnostics diagnostics_impl(const Mlp& mlp, const ForwardTrace& trace, std::size_t i,
                                  double grad_x_norm_sq, const Matrix& h_jacobian,
                                  const TheoremOptions& opts) {
    LayerDiagnostics d;
    d.layer_index = i;
    d.w_spectral = spectral_norm(mlp.layer(i).weight, opts.spectral_tol, opts.spectral_max_iter);
    d.h_norm_sq = norm_sq(subnetwork_value(trace, i));
    d.hprime_fronorm = std::sqrt(frobenius_norm_sq(h_jacobian));
    d.hprime_opnorm = d.hprime_fronorm == 0.0
                          ? 0.0
                          : spectral_norm(h_jacobian, opts.spectral_tol, opts.spectral_max_iter);
    d.a_i = d.w_spectral * d.hprime_opnorm;

    if (d.a_i < opts.eps) {
        d.degenerate = true;
        d.degenerate_reason = "zero denominator: ||w_i||*||h_i'|| < eps";
        return d;
    }
    d.weight_term = grad_x_norm_sq * d.h_norm_sq / (d.a_i * d.a_i);
    d.bias_term = grad_x_norm_sq / (d.a_i * d.a_i);
    if (d.h_norm_sq < opts.eps * opts.eps) {
        d.degenerate = true;
        d.degenerate_reason = "zero activation: ||h_i||^2 < eps^2";
    }
    return d;
}

}  // namespace

LayerDiagnostics layer_diagnostics(const Mlp& mlp, const ForwardTrace& trace, std::size_t i,
                                   std::size_t output_index, const TheoremOptions& opts) {
    if (i >= mlp.depth())
        throw std::out_of_range("layer_diagnostics: layer index out of range");
    const double gsq = grad_x_norm_sq_for(mlp, trace, output_index);
    return diagnostics_impl(mlp, trace, i, gsq, subnetwork_input_jacobian(mlp, trace, i), opts);
}

TheoremVerdict check_theorem(const Mlp& mlp, const Vector& x, std::size_t output_index,
                             const TheoremOptions& opts) {
    if (output_index >= mlp.output_dim())
        throw std::out_of_range("check_theorem: output index out of range");

    const ForwardTrace trace = forward(mlp, x);
    const JacobianBundle bundle = parameter_gradients(mlp, trace, output_index);
    const std::vector<Matrix> h_jacobians = all_subnetwork_jacobians(mlp, trace);

    TheoremVerdict verdict;
    verdict.output_index = output_index;
    verdict.grad_x_norm_sq = frobenius_norm_sq(bundle.input_jacobian);
    verdict.rhs = param_grad_norm_sq(bundle);

    for (std::size_t i = 0; i < mlp.depth(); ++i) {
        LayerDiagnostics d =
            diagnostics_impl(mlp, trace, i, verdict.grad_x_norm_sq, h_jacobians[i], opts);
        if (d.degenerate) {
            verdict.skipped_layers.emplace_back(i, d.degenerate_reason);
        } else {
            verdict.lhs += d.weight_term + d.bias_term;
        }
        verdict.per_layer.push_back(std::move(d));
    }
    verdict.all_layers_degenerate = verdict.skipped_layers.size() == mlp.depth();
    verdict.slack = verdict.rhs - verdict.lhs;
    return verdict;
}

LemmaCheck weight_lemma_check(const Mlp& mlp, const ForwardTrace& trace, std::size_t i,
                              std::size_t output_index, const TheoremOptions& opts) {
    const LayerDiagnostics d = layer_diagnostics(mlp, trace, i, output_index, opts);
    if (d.degenerate)
        throw DegenerateLayerError("weight_lemma_check: layer " + std::to_string(i) + " is " +
                                   d.degenerate_reason);
    const JacobianBundle bundle = parameter_gradients(mlp, trace, output_index);
    return LemmaCheck{d.weight_term, frobenius_norm_sq(bundle.weight_grads[i])};
}

LemmaCheck bias_lemma_check(const Mlp& mlp, const ForwardTrace& trace, std::size_t i,
                            std::size_t output_index, const TheoremOptions& opts) {
    const LayerDiagnostics d = layer_diagnostics(mlp, trace, i, output_index, opts);
    if (d.degenerate)
        throw DegenerateLayerError("bias_lemma_check: layer " + std::to_string(i) + " is " +
                                   d.degenerate_reason);
    const JacobianBundle bundle = parameter_gradients(mlp, trace, output_index);
    return LemmaCheck{d.bias_term, norm_sq(bundle.bias_grads[i])};
}

Matrix weight_perturbation(const Mlp& mlp, const ForwardTrace& trace, std::size_t i,
                           const Vector& delta_x, double eps) {
    if (i >= mlp.depth())
        throw std::out_of_range("weight_perturbation: layer index out of range");
    const Vector& h = subnetwork_value(trace, i);
    const double hsq = norm_sq(h);
    if (hsq < eps * eps)
        throw DegenerateLayerError("weight_perturbation: ||h_i(x)||^2 is below eps^2");
    const Matrix h_jac = subnetwork_input_jacobian(mlp, trace, i);
    const Vector v = matvec(mlp.layer(i).weight, matvec(h_jac, delta_x));  // w_i h_i'(x) δx
    return scale(outer(v, h), 1.0 / hsq);
}

Vector bias_perturbation(const Mlp& mlp, const ForwardTrace& trace, std::size_t i,
                         const Vector& delta_x) {
    if (i >= mlp.depth())
        throw std::out_of_range("bias_perturbation: layer index out of range");
    const Matrix h_jac = subnetwork_input_jacobian(mlp, trace, i);
    return matvec(mlp.layer(i).weight, matvec(h_jac, delta_x));
}

double weight_perturbation_residual(const Mlp& mlp, const Vector& x, std::size_t i,
                                    const Vector& delta_x, double eps) {
    const ForwardTrace trace = forward(mlp, x);
    const Matrix u = weight_perturbation(mlp, trace, i, delta_x, eps);
    Mlp perturbed = mlp;
    perturbed.layer(i).weight = add(perturbed.layer(i).weight, u);
    const Vector shifted = forward(mlp, add(x, delta_x)).output;
    const Vector mimicked = forward(perturbed, x).output;
    return norm(sub(mimicked, shifted));
}

double bias_perturbation_residual(const Mlp& mlp, const Vector& x, std::size_t i,
                                  const Vector& delta_x) {
    const ForwardTrace trace = forward(mlp, x);
    const Vector u = bias_perturbation(mlp, trace, i, delta_x);
    Mlp perturbed = mlp;
    perturbed.layer(i).bias = add(perturbed.layer(i).bias, u);
    const Vector shifted = forward(mlp, add(x, delta_x)).output;
    const Vector mimicked = forward(perturbed, x).output;
    return norm(sub(mimicked, shifted));
}

PythagorasCheck pythagoras_check(const JacobianBundle& bundle) {
    PythagorasCheck check;
    const Vector flat = flatten_gradients(bundle);
    for (double g : flat.data) check.total += g * g;
    for (std::size_t i = 0; i < bundle.weight_grads.size(); ++i) {
        check.sum_of_parts +=
            frobenius_norm_sq(bundle.weight_grads[i]) + norm_sq(bundle.bias_grads[i]);
    }
    return check;
}

}  // namespace geomrazor
