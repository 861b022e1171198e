#include "geomrazor/network.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "geomrazor/rng.hpp"

namespace geomrazor {

double activation_apply(Activation a, double z) {
    switch (a) {
        case Activation::Identity: return z;
        case Activation::ReLU: return z > 0.0 ? z : 0.0;
        case Activation::Tanh: return std::tanh(z);
        case Activation::Sigmoid: return 1.0 / (1.0 + std::exp(-z));
    }
    throw std::invalid_argument("activation_apply: unknown kind");
}

double activation_derivative(Activation a, double z) {
    switch (a) {
        case Activation::Identity: return 1.0;
        case Activation::ReLU: return z > 0.0 ? 1.0 : 0.0;
        case Activation::Tanh: {
            const double t = std::tanh(z);
            return 1.0 - t * t;
        }
        case Activation::Sigmoid: {
            const double s = 1.0 / (1.0 + std::exp(-z));
            return s * (1.0 - s);
        }
    }
    throw std::invalid_argument("activation_derivative: unknown kind");
}

const char* activation_name(Activation a) {
    switch (a) {
        case Activation::Identity: return "identity";
        case Activation::ReLU: return "relu";
        case Activation::Tanh: return "tanh";
        case Activation::Sigmoid: return "sigmoid";
    }
    throw std::invalid_argument("activation_name: unknown kind");
}

Activation activation_from_name(const std::string& name) {
    if (name == "identity") return Activation::Identity;
    if (name == "relu") return Activation::ReLU;
    if (name == "tanh") return Activation::Tanh;
    if (name == "sigmoid") return Activation::Sigmoid;
    throw std::invalid_argument("unknown activation \"" + name + "\"");
}

Mlp::Mlp(std::vector<Layer> layers) : layers_(std::move(layers)) {
    if (layers_.empty()) throw std::invalid_argument("Mlp: needs at least one layer");
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        const Layer& l = layers_[i];
        if (l.weight.empty()) throw std::invalid_argument("Mlp: layer " + std::to_string(i) + " has an empty weight matrix");
        if (l.bias.dim() != l.fan_out()) {
            throw std::invalid_argument("Mlp: layer " + std::to_string(i) +
                                        " bias dim " + std::to_string(l.bias.dim()) +
                                        " does not match fan_out " + std::to_string(l.fan_out()));
        }
        if (i > 0 && l.fan_in() != layers_[i - 1].fan_out()) {
            throw std::invalid_argument("Mlp: layer " + std::to_string(i) + " fan_in " +
                                        std::to_string(l.fan_in()) + " does not chain with layer " +
                                        std::to_string(i - 1) + " fan_out " +
                                        std::to_string(layers_[i - 1].fan_out()));
        }
    }
}

std::size_t Mlp::parameter_count() const {
    std::size_t n = 0;
    for (const Layer& l : layers_) n += l.weight.data.size() + l.bias.dim();
    return n;
}

Mlp make_mlp(std::size_t input_dim, const std::vector<std::size_t>& hidden,
             std::size_t output_dim, Activation hidden_activation,
             std::uint64_t init_seed) {
    if (input_dim == 0 || output_dim == 0)
        throw std::invalid_argument("make_mlp: zero input or output dimension");
    Rng rng(init_seed);
    std::vector<std::size_t> dims;
    dims.push_back(input_dim);
    dims.insert(dims.end(), hidden.begin(), hidden.end());
    dims.push_back(output_dim);

    std::vector<Layer> layers;
    for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
        const std::size_t fan_in = dims[i];
        const std::size_t fan_out = dims[i + 1];
        if (fan_in == 0 || fan_out == 0)
            throw std::invalid_argument("make_mlp: zero layer width");
        const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        Layer layer;
        layer.weight = Matrix(fan_out, fan_in);
        for (double& w : layer.weight.data) w = rng.uniform(-a, a);
        layer.bias = Vector(fan_out, 0.0);
        const bool is_output = (i + 2 == dims.size());
        layer.activation = is_output ? Activation::Identity : hidden_activation;
        layers.push_back(std::move(layer));
    }
    return Mlp(std::move(layers));
}

ForwardTrace forward(const Mlp& mlp, const Vector& x) {
    if (x.dim() != mlp.input_dim()) {
        throw std::invalid_argument("forward: layer 0 expects input dim " +
                                    std::to_string(mlp.input_dim()) + ", got " +
                                    std::to_string(x.dim()));
    }
    ForwardTrace trace;
    trace.input = x;
    trace.pre_activations.reserve(mlp.depth());
    trace.activations.reserve(mlp.depth());

    const Vector* h = &trace.input;
    for (std::size_t i = 0; i < mlp.depth(); ++i) {
        const Layer& layer = mlp.layer(i);
        if (h->dim() != layer.fan_in()) {
            throw std::invalid_argument("forward: layer " + std::to_string(i) +
                                        " expects input dim " + std::to_string(layer.fan_in()) +
                                        ", got " + std::to_string(h->dim()));
        }
        Vector z = matvec(layer.weight, *h);
        for (std::size_t r = 0; r < z.dim(); ++r) z[r] += layer.bias[r];
        Vector a(z.dim());
        for (std::size_t r = 0; r < z.dim(); ++r) a[r] = activation_apply(layer.activation, z[r]);
        trace.pre_activations.push_back(std::move(z));
        trace.activations.push_back(std::move(a));
        h = &trace.activations.back();
    }
    trace.output = trace.activations.back();
    return trace;
}

const Vector& subnetwork_value(const ForwardTrace& trace, std::size_t i) {
    if (i > trace.activations.size())
        throw std::out_of_range("subnetwork_value: layer index " + std::to_string(i) +
                                " out of range");
    if (i == 0) return trace.input;
    return trace.activations[i - 1];
}

namespace {

// M ← diag(a'(z)) · W applied as row scaling of W.
Matrix layer_jacobian(const Layer& layer, const Vector& z) {
    Matrix j = layer.weight;
    for (std::size_t r = 0; r < j.rows; ++r) {
        const double d = activation_derivative(layer.activation, z[r]);
        double* row = j.data.data() + r * j.cols;
        for (std::size_t c = 0; c < j.cols; ++c) row[c] *= d;
    }
    return j;
}

}  // namespace

Matrix subnetwork_input_jacobian(const Mlp& mlp, const ForwardTrace& trace, std::size_t i) {
    if (i > mlp.depth())
        throw std::out_of_range("subnetwork_input_jacobian: layer index " + std::to_string(i) +
                                " out of range");
    Matrix j = Matrix::identity(mlp.input_dim());
    for (std::size_t k = 0; k < i; ++k) {
        j = matmul(layer_jacobian(mlp.layer(k), trace.pre_activations[k]), j);
    }
    return j;
}

std::vector<Matrix> all_subnetwork_jacobians(const Mlp& mlp, const ForwardTrace& trace) {
    std::vector<Matrix> out;
    out.reserve(mlp.depth() + 1);
    out.push_back(Matrix::identity(mlp.input_dim()));
    for (std::size_t k = 0; k < mlp.depth(); ++k) {
        out.push_back(matmul(layer_jacobian(mlp.layer(k), trace.pre_activations[k]), out.back()));
    }
    return out;
}

Matrix input_jacobian(const Mlp& mlp, const ForwardTrace& trace) {
    if (trace.activations.size() != mlp.depth())
        throw std::invalid_argument("input_jacobian: trace does not match network depth");
    // Reverse accumulation: M ← M · diag(a'(z_k)) · W_k from the output down.
    Matrix m = Matrix::identity(mlp.output_dim());
    for (std::size_t k = mlp.depth(); k-- > 0;) {
        const Layer& layer = mlp.layer(k);
        const Vector& z = trace.pre_activations[k];
        // scale columns of m by a'(z), then multiply by W_k
        Matrix scaled = m;
        for (std::size_t r = 0; r < scaled.rows; ++r) {
            double* row = scaled.data.data() + r * scaled.cols;
            for (std::size_t c = 0; c < scaled.cols; ++c)
                row[c] *= activation_derivative(layer.activation, z[c]);
        }
        m = matmul(scaled, layer.weight);
    }
    return m;
}

JacobianBundle backprop_output_gradient(const Mlp& mlp, const ForwardTrace& trace,
                                        const Vector& out_grad) {
    if (out_grad.dim() != mlp.output_dim())
        throw std::invalid_argument("backprop_output_gradient: gradient dim mismatch");

    JacobianBundle bundle;
    bundle.weight_grads.resize(mlp.depth());
    bundle.bias_grads.resize(mlp.depth());

    // delta holds d⟨out_grad, f⟩/dz for the current layer.
    Vector delta(out_grad.dim());
    {
        const Layer& last = mlp.layer(mlp.depth() - 1);
        const Vector& z = trace.pre_activations.back();
        for (std::size_t r = 0; r < delta.dim(); ++r)
            delta[r] = out_grad[r] * activation_derivative(last.activation, z[r]);
    }

    for (std::size_t k = mlp.depth(); k-- > 0;) {
        const Layer& layer = mlp.layer(k);
        const Vector& h = subnetwork_value(trace, k);
        bundle.weight_grads[k] = outer(delta, h);
        bundle.bias_grads[k] = delta;
        Vector prev = matvec_transposed(layer.weight, delta);
        if (k > 0) {
            const Layer& below = mlp.layer(k - 1);
            const Vector& z = trace.pre_activations[k - 1];
            for (std::size_t r = 0; r < prev.dim(); ++r)
                prev[r] *= activation_derivative(below.activation, z[r]);
        }
        delta = std::move(prev);
    }

    bundle.input_jacobian = Matrix(1, mlp.input_dim());
    for (std::size_t c = 0; c < mlp.input_dim(); ++c) bundle.input_jacobian.at(0, c) = delta[c];
    return bundle;
}

JacobianBundle parameter_gradients(const Mlp& mlp, const ForwardTrace& trace,
                                   std::size_t output_index) {
    if (output_index >= mlp.output_dim())
        throw std::out_of_range("parameter_gradients: output index " +
                                std::to_string(output_index) + " out of range");
    Vector e(mlp.output_dim(), 0.0);
    e[output_index] = 1.0;
    JacobianBundle bundle = backprop_output_gradient(mlp, trace, e);
    bundle.output_index = output_index;
    return bundle;
}

double param_grad_norm_sq(const JacobianBundle& bundle) {
    double acc = 0.0;
    for (std::size_t k = 0; k < bundle.weight_grads.size(); ++k) {
        for (double w : bundle.weight_grads[k].data) acc += w * w;
        for (double b : bundle.bias_grads[k].data) acc += b * b;
    }
    return acc;
}

Vector flatten_gradients(const JacobianBundle& bundle) {
    Vector flat;
    for (std::size_t k = 0; k < bundle.weight_grads.size(); ++k) {
        const auto& w = bundle.weight_grads[k].data;
        flat.data.insert(flat.data.end(), w.begin(), w.end());
        const auto& b = bundle.bias_grads[k].data;
        flat.data.insert(flat.data.end(), b.begin(), b.end());
    }
    return flat;
}

Vector flatten_parameters(const Mlp& mlp) {
    Vector flat;
    for (const Layer& l : mlp.layers()) {
        flat.data.insert(flat.data.end(), l.weight.data.begin(), l.weight.data.end());
        flat.data.insert(flat.data.end(), l.bias.data.begin(), l.bias.data.end());
    }
    return flat;
}

double parameter_norm_sq(const Mlp& mlp) {
    double acc = 0.0;
    for (const Layer& l : mlp.layers()) {
        for (double w : l.weight.data) acc += w * w;
        for (double b : l.bias.data) acc += b * b;
    }
    return acc;
}

Matrix fd_input_jacobian(const Mlp& mlp, const Vector& x, double step) {
    if (!(step > 0.0)) throw std::invalid_argument("fd_input_jacobian: step must be > 0");
    Matrix j(mlp.output_dim(), mlp.input_dim());
    for (std::size_t c = 0; c < mlp.input_dim(); ++c) {
        Vector xp = x, xm = x;
        xp[c] += step;
        xm[c] -= step;
        const Vector fp = forward(mlp, xp).output;
        const Vector fm = forward(mlp, xm).output;
        for (std::size_t r = 0; r < mlp.output_dim(); ++r)
            j.at(r, c) = (fp[r] - fm[r]) / (2.0 * step);
    }
    return j;
}

JacobianBundle fd_parameter_gradients(const Mlp& mlp, const Vector& x,
                                      std::size_t output_index, double step) {
    if (!(step > 0.0)) throw std::invalid_argument("fd_parameter_gradients: step must be > 0");
    if (output_index >= mlp.output_dim())
        throw std::out_of_range("fd_parameter_gradients: output index out of range");

    JacobianBundle bundle;
    bundle.output_index = output_index;
    Mlp work = mlp;
    for (std::size_t k = 0; k < mlp.depth(); ++k) {
        const Layer& layer = mlp.layer(k);
        Matrix wg(layer.fan_out(), layer.fan_in());
        for (std::size_t idx = 0; idx < layer.weight.data.size(); ++idx) {
            const double orig = layer.weight.data[idx];
            work.layer(k).weight.data[idx] = orig + step;
            const double fp = forward(work, x).output[output_index];
            work.layer(k).weight.data[idx] = orig - step;
            const double fm = forward(work, x).output[output_index];
            work.layer(k).weight.data[idx] = orig;
            wg.data[idx] = (fp - fm) / (2.0 * step);
        }
        Vector bg(layer.fan_out());
        for (std::size_t r = 0; r < layer.fan_out(); ++r) {
            const double orig = layer.bias[r];
            work.layer(k).bias[r] = orig + step;
            const double fp = forward(work, x).output[output_index];
            work.layer(k).bias[r] = orig - step;
            const double fm = forward(work, x).output[output_index];
            work.layer(k).bias[r] = orig;
            bg[r] = (fp - fm) / (2.0 * step);
        }
        bundle.weight_grads.push_back(std::move(wg));
        bundle.bias_grads.push_back(std::move(bg));
    }

    const Matrix full = fd_input_jacobian(mlp, x, step);
    bundle.input_jacobian = Matrix(1, mlp.input_dim());
    for (std::size_t c = 0; c < mlp.input_dim(); ++c)
        bundle.input_jacobian.at(0, c) = full.at(output_index, c);
    return bundle;
}

// ---- checkpoint format -------------------------------------------------------

std::string mlp_to_checkpoint(const Mlp& mlp) {
    nlohmann::json j;
    j["input_dim"] = mlp.input_dim();
    nlohmann::json layers = nlohmann::json::array();
    for (const Layer& l : mlp.layers()) {
        nlohmann::json jl;
        jl["rows"] = l.weight.rows;
        jl["cols"] = l.weight.cols;
        jl["weight"] = l.weight.data;
        jl["bias"] = l.bias.data;
        jl["activation"] = activation_name(l.activation);
        layers.push_back(std::move(jl));
    }
    j["layers"] = std::move(layers);
    return j.dump(2);
}

Mlp mlp_from_checkpoint(const std::string& json_text) {
    nlohmann::json j = nlohmann::json::parse(json_text);
    if (!j.is_object() || !j.contains("input_dim") || !j.contains("layers"))
        throw std::invalid_argument("checkpoint: expected object with input_dim and layers");
    const std::size_t input_dim = j.at("input_dim").get<std::size_t>();

    std::vector<Layer> layers;
    for (const auto& jl : j.at("layers")) {
        Layer l;
        const std::size_t rows = jl.at("rows").get<std::size_t>();
        const std::size_t cols = jl.at("cols").get<std::size_t>();
        l.weight = Matrix(rows, cols, jl.at("weight").get<std::vector<double>>());
        l.bias = Vector();
        l.bias.data = jl.at("bias").get<std::vector<double>>();
        l.activation = activation_from_name(jl.at("activation").get<std::string>());
        if (!all_finite(l.weight) || !all_finite(l.bias))
            throw std::invalid_argument("checkpoint: non-finite entries in layer data");
        layers.push_back(std::move(l));
    }
    Mlp mlp(std::move(layers));
    if (mlp.input_dim() != input_dim)
        throw std::invalid_argument("checkpoint: input_dim does not match layer 0 fan_in");
    return mlp;
}

void save_mlp(const Mlp& mlp, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << mlp_to_checkpoint(mlp) << "\n";
}

Mlp load_mlp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return mlp_from_checkpoint(ss.str());
}

}  // namespace geomrazor
