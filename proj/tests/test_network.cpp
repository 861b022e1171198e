#include <doctest.h>

#include <cmath>

#include "geomrazor/network.hpp"
#include "support/oracles.hpp"

using namespace geomrazor;

namespace {

Layer make_layer(Matrix w, Vector b, Activation act) {
    Layer l;
    l.weight = std::move(w);
    l.bias = std::move(b);
    l.activation = act;
    return l;
}

Mlp seeded_net(std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out,
               Activation act, std::uint64_t seed) {
    return make_mlp(in, hidden, out, act, seed);
}

// Max disagreement, normalized by the larger of 1 and the oracle's max
// magnitude.
double max_rel_error(const Matrix& got, const Matrix& want) {
    REQUIRE(got.rows == want.rows);
    REQUIRE(got.cols == want.cols);
    double scale = 1.0;
    for (double v : want.data) scale = std::max(scale, std::abs(v));
    double err = 0.0;
    for (std::size_t i = 0; i < got.data.size(); ++i)
        err = std::max(err, std::abs(got.data[i] - want.data[i]));
    return err / scale;
}

double max_rel_error(const JacobianBundle& got, const JacobianBundle& want) {
    double err = max_rel_error(got.input_jacobian, want.input_jacobian);
    for (std::size_t k = 0; k < got.weight_grads.size(); ++k) {
        err = std::max(err, max_rel_error(got.weight_grads[k], want.weight_grads[k]));
        Matrix gb(1, got.bias_grads[k].dim(), got.bias_grads[k].data);
        Matrix wb(1, want.bias_grads[k].dim(), want.bias_grads[k].data);
        err = std::max(err, max_rel_error(gb, wb));
    }
    return err;
}

bool relu_pre_activations_away_from_kinks(const Mlp& mlp, const Vector& x, double margin) {
    const ForwardTrace trace = forward(mlp, x);
    for (const Vector& z : trace.pre_activations)
        for (double v : z.data)
            if (std::abs(v) < margin) return false;
    return true;
}

}  // namespace

TEST_CASE("activation derivative matches central differences") {
    Rng rng(3);
    for (Activation act : {Activation::Identity, Activation::Tanh, Activation::Sigmoid}) {
        for (int i = 0; i < 1000; ++i) {
            const double z = rng.uniform(-4.0, 4.0);
            const double h = 1e-6;
            const double fd =
                (activation_apply(act, z + h) - activation_apply(act, z - h)) / (2.0 * h);
            const double exact = activation_derivative(act, z);
            CHECK(std::abs(fd - exact) <= 1e-6 * std::max(1.0, std::abs(exact)));
        }
    }
    CHECK(activation_derivative(Activation::ReLU, 0.0) == 0.0);
    CHECK(activation_derivative(Activation::ReLU, -1.0) == 0.0);
    CHECK(activation_derivative(Activation::ReLU, 2.0) == 1.0);
}

TEST_CASE("forward: single-layer examples") {
    Mlp identity_net(
        {make_layer(Matrix(1, 1, std::vector<double>{2.0}), Vector{1.0}, Activation::Identity)});
    CHECK(forward(identity_net, Vector{3.0}).output[0] == 7.0);

    Mlp relu_net(
        {make_layer(Matrix(1, 1, std::vector<double>{1.0}), Vector{0.0}, Activation::ReLU)});
    CHECK(forward(relu_net, Vector{-2.0}).output[0] == 0.0);
}

TEST_CASE("forward: 2-layer tanh net matches a straight-line reference") {
    const Mlp net = seeded_net(3, {4}, 2, Activation::Tanh, 21);
    const Vector x = oracles::random_vector(3, 77);
    const ForwardTrace trace = forward(net, x);

    // Straight-line re-evaluation with explicit loops.
    std::vector<double> h(x.data);
    for (std::size_t layer = 0; layer < net.depth(); ++layer) {
        const Layer& l = net.layer(layer);
        std::vector<double> next(l.fan_out());
        for (std::size_t r = 0; r < l.fan_out(); ++r) {
            double z = l.bias[r];
            for (std::size_t c = 0; c < l.fan_in(); ++c) z += l.weight.at(r, c) * h[c];
            next[r] = layer + 1 == net.depth() ? z : std::tanh(z);
        }
        h = std::move(next);
    }
    for (std::size_t i = 0; i < h.size(); ++i)
        CHECK(trace.output[i] == doctest::Approx(h[i]).epsilon(1e-14));
}

TEST_CASE("forward: dimension mismatch names the offending layer") {
    const Mlp net = seeded_net(3, {4}, 2, Activation::Tanh, 5);
    CHECK_THROWS_WITH_AS(forward(net, Vector{1.0}), doctest::Contains("layer 0"),
                         std::invalid_argument);
}

TEST_CASE("forward is pure: identical inputs give bitwise-identical traces") {
    const Mlp net = seeded_net(4, {8, 8}, 2, Activation::Sigmoid, 9);
    const Vector x = oracles::random_vector(4, 10);
    const ForwardTrace a = forward(net, x);
    const ForwardTrace b = forward(net, x);
    CHECK(a.output == b.output);
    CHECK(a.pre_activations.size() == b.pre_activations.size());
    for (std::size_t i = 0; i < a.pre_activations.size(); ++i)
        CHECK(a.pre_activations[i] == b.pre_activations[i]);
}

TEST_CASE("subnetwork_value: h_0 is the input, h_i the cached activations") {
    const Mlp net = seeded_net(3, {5, 4}, 2, Activation::Tanh, 13);
    const Vector x = oracles::random_vector(3, 14);
    const ForwardTrace trace = forward(net, x);

    CHECK(subnetwork_value(trace, 0) == x);
    CHECK(subnetwork_value(trace, 1) == trace.activations[0]);

    // Truncated forward pass as an oracle for h_2.
    Mlp truncated({net.layer(0), net.layer(1)});
    const Vector expected = forward(truncated, x).output;
    CHECK(subnetwork_value(trace, 2) == expected);

    CHECK_THROWS_AS(subnetwork_value(trace, 9), std::out_of_range);
}

TEST_CASE("subnetwork_input_jacobian: identity, linear chain, ReLU vs finite differences") {
    const Mlp net = seeded_net(3, {5, 4}, 2, Activation::Identity, 31);
    const Vector x = oracles::random_vector(3, 32);
    const ForwardTrace trace = forward(net, x);

    CHECK(subnetwork_input_jacobian(net, trace, 0) == Matrix::identity(3));

    // Linear layers: the h_2 Jacobian is the product of the first two weights.
    const Matrix expected = matmul(net.layer(1).weight, net.layer(0).weight);
    CHECK(max_rel_error(subnetwork_input_jacobian(net, trace, 2), expected) <= 1e-14);

    // ReLU net away from kinks: truncated finite differences.
    const Mlp relu = seeded_net(3, {6, 6}, 1, Activation::ReLU, 33);
    std::size_t checked = 0;
    for (std::uint64_t seed = 0; checked < 5 && seed < 100; ++seed) {
        const Vector xr = oracles::random_vector(3, 700 + seed);
        if (!relu_pre_activations_away_from_kinks(relu, xr, 1e-3)) continue;
        ++checked;
        const ForwardTrace tr = forward(relu, xr);
        Mlp truncated({relu.layer(0), relu.layer(1)});
        const Matrix fd = fd_input_jacobian(truncated, xr, 1e-5);
        CHECK(max_rel_error(subnetwork_input_jacobian(relu, tr, 2), fd) <= 1e-6);
    }
    CHECK(checked == 5);
}

TEST_CASE("input_jacobian: closed forms and finite differences") {
    // Single linear layer: the Jacobian is the weight matrix itself.
    const Mlp linear = seeded_net(4, {}, 3, Activation::Tanh, 41);
    const Vector x = oracles::random_vector(4, 42);
    CHECK(input_jacobian(linear, forward(linear, x)) == linear.layer(0).weight);

    // Scalar tanh layer: chain-rule closed form.
    Mlp tanh_net(
        {make_layer(Matrix(1, 1, std::vector<double>{1.7}), Vector{0.3}, Activation::Tanh)});
    const double x0 = 0.6;
    const double t = std::tanh(1.7 * x0 + 0.3);
    const Matrix j = input_jacobian(tanh_net, forward(tanh_net, Vector{x0}));
    CHECK(j.at(0, 0) == doctest::Approx(1.7 * (1.0 - t * t)).epsilon(1e-14));

    // Seeded wide ReLU net vs finite differences away from kinks.
    const Mlp relu = seeded_net(3, {300}, 1, Activation::ReLU, 43);
    std::size_t checked = 0;
    for (std::uint64_t seed = 0; checked < 3 && seed < 200; ++seed) {
        const Vector xr = oracles::random_vector(3, 800 + seed);
        if (!relu_pre_activations_away_from_kinks(relu, xr, 1e-3)) continue;
        ++checked;
        const Matrix exact = input_jacobian(relu, forward(relu, xr));
        CHECK(max_rel_error(exact, fd_input_jacobian(relu, xr, 1e-5)) <= 1e-6);
    }
    CHECK(checked >= 1);
}

TEST_CASE("parameter_gradients: single linear layer closed form") {
    Mlp net({make_layer(Matrix(1, 1, std::vector<double>{2.0}), Vector{0.5},
                        Activation::Identity)});
    const JacobianBundle g = parameter_gradients(net, forward(net, Vector{3.0}), 0);
    CHECK(g.weight_grads[0].at(0, 0) == 3.0);  // ∇_w (w·x + b) = x
    CHECK(g.bias_grads[0][0] == 1.0);
    CHECK(g.input_jacobian.at(0, 0) == 2.0);

    const JacobianBundle g0 = parameter_gradients(net, forward(net, Vector{0.0}), 0);
    CHECK(g0.weight_grads[0].at(0, 0) == 0.0);
    CHECK(g0.bias_grads[0][0] == 1.0);
}

TEST_CASE("parameter_gradients: seeded 2-layer tanh net vs finite differences") {
    const Mlp net = seeded_net(3, {6}, 2, Activation::Tanh, 55);
    const Vector x = oracles::random_vector(3, 56);
    const ForwardTrace trace = forward(net, x);
    for (std::size_t k = 0; k < 2; ++k) {
        const JacobianBundle exact = parameter_gradients(net, trace, k);
        const JacobianBundle fd = fd_parameter_gradients(net, x, k, 1e-5);
        CHECK(max_rel_error(exact, fd) <= 1e-6);
    }
}

TEST_CASE("reverse-mode matches finite differences on 100 seeded networks") {
    std::size_t tested = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng shape(2000 + seed);
        const std::size_t depth = 1 + shape.below(3);
        std::vector<std::size_t> hidden;
        for (std::size_t i = 0; i + 1 < depth; ++i) hidden.push_back(2 + shape.below(7));
        const std::size_t in = 1 + shape.below(4);
        const std::size_t out = 1 + shape.below(3);
        const Activation act = (seed % 3 == 0)   ? Activation::Identity
                               : (seed % 3 == 1) ? Activation::Tanh
                                                 : Activation::Sigmoid;
        const Mlp net = seeded_net(in, hidden, out, act, 3000 + seed);
        const Vector x = oracles::random_vector(in, 4000 + seed);
        const ForwardTrace trace = forward(net, x);

        CHECK(max_rel_error(input_jacobian(net, trace), fd_input_jacobian(net, x, 1e-5)) <= 1e-6);
        const std::size_t k = shape.below(out);
        CHECK(max_rel_error(parameter_gradients(net, trace, k),
                            fd_parameter_gradients(net, x, k, 1e-5)) <= 1e-6);
        ++tested;
    }
    CHECK(tested == 100);
}

TEST_CASE("param_grad_norm_sq: closed form and flatten oracle") {
    Mlp net({make_layer(Matrix(1, 1, std::vector<double>{2.0}), Vector{0.5},
                        Activation::Identity)});
    const JacobianBundle g = parameter_gradients(net, forward(net, Vector{3.0}), 0);
    CHECK(param_grad_norm_sq(g) == 10.0);  // 3² + 1²

    JacobianBundle zero = g;
    for (auto& w : zero.weight_grads) std::fill(w.data.begin(), w.data.end(), 0.0);
    for (auto& b : zero.bias_grads) std::fill(b.data.begin(), b.data.end(), 0.0);
    CHECK(param_grad_norm_sq(zero) == 0.0);

    const Mlp deep = seeded_net(4, {7, 5}, 2, Activation::Tanh, 61);
    const JacobianBundle gd =
        parameter_gradients(deep, forward(deep, oracles::random_vector(4, 62)), 1);
    const Vector flat = flatten_gradients(gd);
    double expected = 0.0;
    for (double v : flat.data) expected += v * v;
    CHECK(param_grad_norm_sq(gd) == expected);  // same summation order, exact
}

TEST_CASE("finite differences: exact on linear maps, O(step²) on smooth nets") {
    const Mlp linear = seeded_net(3, {}, 2, Activation::Tanh, 71);
    const Vector x = oracles::random_vector(3, 72);
    for (double step : {1e-3, 1e-5}) {
        CHECK(max_rel_error(fd_input_jacobian(linear, x, step), linear.layer(0).weight) <= 1e-9);
    }

    Mlp constant({make_layer(Matrix(2, 2, 0.0), Vector(2, 1.0), Activation::Identity)});
    const Matrix fdc = fd_input_jacobian(constant, Vector{0.3, -0.4}, 1e-4);
    for (double v : fdc.data) CHECK(v == 0.0);

    // Halving the step shrinks the disagreement roughly 4x.
    const Mlp net = seeded_net(2, {8}, 1, Activation::Tanh, 73);
    const Vector xt = oracles::random_vector(2, 74);
    const Matrix exact = input_jacobian(net, forward(net, xt));
    auto err_at = [&](double step) {
        const Matrix fd = fd_input_jacobian(net, xt, step);
        double e = 0.0;
        for (std::size_t i = 0; i < fd.data.size(); ++i)
            e = std::max(e, std::abs(fd.data[i] - exact.data[i]));
        return e;
    };
    const double e1 = err_at(1e-2);
    const double e2 = err_at(5e-3);
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.35));
}

TEST_CASE("checkpoint round-trips bit-exactly") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Mlp net = seeded_net(2 + seed % 3, {4, 3}, 1 + seed % 2,
                                   seed % 2 ? Activation::Tanh : Activation::ReLU, 900 + seed);
        const Mlp restored = mlp_from_checkpoint(mlp_to_checkpoint(net));
        REQUIRE(restored.depth() == net.depth());
        for (std::size_t k = 0; k < net.depth(); ++k) {
            CHECK(restored.layer(k).weight == net.layer(k).weight);
            CHECK(restored.layer(k).bias == net.layer(k).bias);
            CHECK(restored.layer(k).activation == net.layer(k).activation);
        }
    }
}

TEST_CASE("mlp validation: mismatched shapes are rejected") {
    std::vector<Layer> bad;
    bad.push_back(make_layer(Matrix(2, 3, 0.0), Vector(2, 0.0), Activation::Tanh));
    bad.push_back(make_layer(Matrix(2, 5, 0.0), Vector(2, 0.0), Activation::Tanh));
    CHECK_THROWS_WITH_AS(Mlp(std::move(bad)), doctest::Contains("layer 1"),
                         std::invalid_argument);
}
