#include <doctest.h>

#include <cmath>
#include <vector>

#include "osp/value_net.hpp"

using namespace osp;

namespace {

// Straight-line evaluation with nothing but loops over the flat parameter list.
double loop_forward(const std::vector<double>& x, const NetworkSpec& spec, const std::vector<double>& flat) {
    const std::vector<int> sizes = layer_sizes(spec);
    std::vector<double> a = x;
    std::size_t p = 0;
    for (std::size_t k = 0; k + 1 < sizes.size(); ++k) {
        const int in = sizes[k], out = sizes[k + 1];
        std::vector<double> z(static_cast<std::size_t>(out), 0.0);
        for (int i = 0; i < out; ++i) {
            for (int j = 0; j < in; ++j) z[static_cast<std::size_t>(i)] += flat[p++] * a[static_cast<std::size_t>(j)];
        }
        for (int i = 0; i < out; ++i) z[static_cast<std::size_t>(i)] += flat[p++];
        const bool hidden = k + 2 < sizes.size();
        if (hidden && spec.activation == Activation::relu) {
            for (double& v : z) v = v > 0.0 ? v : 0.0;
        }
        a = std::move(z);
    }
    return a[0];
}

std::vector<double> random_input(int n, Rng& rng) {
    std::vector<double> x(static_cast<std::size_t>(n));
    for (double& v : x) v = 2.0 * uniform01(rng) - 1.0;
    return x;
}

// Central differences over every parameter; relative error with a floor of
// 1e-6 so that exactly-dead units (both sides zero) compare cleanly.
double finite_difference_error(const WeightBundle& w, const std::vector<double>& x) {
    const WeightBundle g = backward(x, w, 1.0);
    const std::vector<double> analytic = g.flatten();
    std::vector<double> flat = w.flatten();
    WeightBundle probe = w;
    const double h = 1e-5;
    double worst = 0.0;
    for (std::size_t p = 0; p < flat.size(); ++p) {
        const double keep = flat[p];
        flat[p] = keep + h;
        probe.assign_flat(flat);
        const double up = forward(x, probe);
        flat[p] = keep - h;
        probe.assign_flat(flat);
        const double down = forward(x, probe);
        flat[p] = keep;
        const double numeric = (up - down) / (2.0 * h);
        const double scale = std::max({std::fabs(numeric), std::fabs(analytic[p]), 1e-6});
        worst = std::max(worst, std::fabs(numeric - analytic[p]) / scale);
    }
    return worst;
}

}  // namespace

TEST_CASE("parameter counts") {
    for (int input : {1, 9, 81, 1369}) {
        for (int h : {1, 4, 512, 1024}) {
            const auto expected = static_cast<std::size_t>(h) * (input + 2 * h + 4) + 1;
            CHECK(NetworkSpec::three_layer(input, h).parameter_count() == expected);
        }
    }
    CHECK(NetworkSpec::three_layer(1369, 512).parameter_count() == 1227265);
    Rng rng(1);
    const WeightBundle w = WeightBundle::glorot_uniform(NetworkSpec::three_layer(7, 5), rng);
    CHECK(w.flatten().size() == w.parameter_count());
}

TEST_CASE("forward examples") {
    const NetworkSpec spec = NetworkSpec::three_layer(6, 4);
    Rng rng(2);

    SUBCASE("all-zero weights give zero") {
        const WeightBundle w = WeightBundle::zeros(spec);
        for (int t = 0; t < 10; ++t) CHECK(forward(random_input(6, rng), w) == 0.0);
    }
    SUBCASE("zero hidden weights leave the output bias") {
        WeightBundle w = WeightBundle::glorot_uniform(spec, rng);
        for (std::size_t k = 0; k + 1 < w.weights.size(); ++k) {
            w.weights[k].setZero();
            w.biases[k].setZero();
        }
        w.biases.back()[0] = -3.25;
        for (int t = 0; t < 10; ++t) CHECK(forward(random_input(6, rng), w) == -3.25);
    }
    SUBCASE("matches a loop implementation") {
        for (Activation act : {Activation::relu, Activation::identity}) {
            NetworkSpec s = spec;
            s.activation = act;
            WeightBundle w = WeightBundle::glorot_uniform(s, rng);
            for (auto& b : w.biases) {
                for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = 0.3 * (uniform01(rng) - 0.5);
            }
            for (int t = 0; t < 20; ++t) {
                const auto x = random_input(6, rng);
                CHECK(std::fabs(forward(x, w) - loop_forward(x, s, w.flatten())) <= 1e-12);
            }
        }
    }
    SUBCASE("batch agrees with single samples") {
        const WeightBundle w = WeightBundle::glorot_uniform(spec, rng);
        Eigen::MatrixXd xs(6, 5);
        for (Eigen::Index j = 0; j < 5; ++j) {
            const auto x = random_input(6, rng);
            for (Eigen::Index i = 0; i < 6; ++i) xs(i, j) = x[static_cast<std::size_t>(i)];
        }
        const Eigen::VectorXd ys = forward_batch(xs, w);
        for (Eigen::Index j = 0; j < 5; ++j) {
            const Eigen::VectorXd col = xs.col(j);
            CHECK(ys[j] == doctest::Approx(forward(std::span<const double>(col.data(), 6), w)).epsilon(1e-14));
        }
    }
    SUBCASE("wrong input length") {
        const WeightBundle w = WeightBundle::zeros(spec);
        CHECK_THROWS_AS(forward(random_input(5, rng), w), std::invalid_argument);
    }
}

TEST_CASE("gradient examples") {
    Rng rng(3);

    SUBCASE("3-4-1 net against central differences") {
        const NetworkSpec spec{3, {4}, Activation::relu};
        WeightBundle w = WeightBundle::glorot_uniform(spec, rng);
        w.biases[0] << 0.1, -0.2, 0.3, 0.05;
        CHECK(finite_difference_error(w, {0.4, -0.7, 0.9}) < 1e-5);
    }
    SUBCASE("linear net: output-layer gradient equals the last hidden activations") {
        const NetworkSpec spec{5, {3, 2}, Activation::identity};
        const WeightBundle w = WeightBundle::glorot_uniform(spec, rng);
        const auto x = random_input(5, rng);
        const Eigen::Map<const Eigen::VectorXd> xv(x.data(), 5);
        const Eigen::VectorXd h = w.weights[1] * (w.weights[0] * xv + w.biases[0]) + w.biases[1];
        const WeightBundle g = backward(x, w, 1.0);
        for (Eigen::Index j = 0; j < 2; ++j) CHECK(g.weights[2](0, j) == doctest::Approx(h[j]).epsilon(1e-13));
        CHECK(g.biases[2][0] == 1.0);
    }
    SUBCASE("inactive rectifiers pass no gradient") {
        const NetworkSpec spec{4, {3}, Activation::relu};
        WeightBundle w = WeightBundle::glorot_uniform(spec, rng);
        w.biases[0][1] = -100.0;  // unit 1 is dead for inputs in [-1, 1]
        const WeightBundle g = backward(random_input(4, rng), w, 1.0);
        for (Eigen::Index j = 0; j < 4; ++j) CHECK(g.weights[0](1, j) == 0.0);
        CHECK(g.biases[0][1] == 0.0);
        CHECK(g.weights[1](0, 1) == 0.0);
    }
    SUBCASE("upstream scales the gradient") {
        const NetworkSpec spec = NetworkSpec::three_layer(4, 3);
        const WeightBundle w = WeightBundle::glorot_uniform(spec, rng);
        const auto x = random_input(4, rng);
        const auto g1 = backward(x, w, 1.0).flatten(), g3 = backward(x, w, -2.5).flatten();
        for (std::size_t p = 0; p < g1.size(); ++p) CHECK(g3[p] == doctest::Approx(-2.5 * g1[p]).epsilon(1e-14));
    }
    SUBCASE("batch gradient is the weighted sum of sample gradients") {
        const NetworkSpec spec = NetworkSpec::three_layer(4, 3);
        const WeightBundle w = WeightBundle::glorot_uniform(spec, rng);
        Eigen::MatrixXd xs(4, 3);
        Eigen::VectorXd up(3);
        up << 0.5, -1.0, 2.0;
        std::vector<double> want(w.parameter_count(), 0.0);
        for (Eigen::Index j = 0; j < 3; ++j) {
            const auto x = random_input(4, rng);
            for (Eigen::Index i = 0; i < 4; ++i) xs(i, j) = x[static_cast<std::size_t>(i)];
            const auto g = backward(x, w, up[j]).flatten();
            for (std::size_t p = 0; p < g.size(); ++p) want[p] += g[p];
        }
        const auto got = backward_batch(xs, w, up).flatten();
        for (std::size_t p = 0; p < got.size(); ++p) CHECK(got[p] == doctest::Approx(want[p]).epsilon(1e-12));
    }
}

TEST_CASE("finite differences on 100 random small nets") {
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(derive_seed(77, seed));
        const int input = 2 + static_cast<int>(uniform_index(rng, 6));
        NetworkSpec spec{input, {}, Activation::relu};
        const int depth = 1 + static_cast<int>(uniform_index(rng, 3));
        for (int k = 0; k < depth; ++k) spec.hidden.push_back(2 + static_cast<int>(uniform_index(rng, 6)));
        WeightBundle w = WeightBundle::glorot_uniform(spec, rng);
        for (auto& b : w.biases) {
            for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = 0.2 * (uniform01(rng) - 0.5);
        }
        worst = std::max(worst, finite_difference_error(w, random_input(input, rng)));
    }
    MESSAGE("worst relative error " << worst);
    CHECK(worst < 1e-5);
}

TEST_CASE("Frobenius Lipschitz bound") {
    Rng rng(4);
    for (int t = 0; t < 30; ++t) {
        const WeightBundle w = WeightBundle::glorot_uniform(NetworkSpec::three_layer(8, 6), rng);
        const double L = lipschitz_bound(w);
        for (int s = 0; s < 10; ++s) {
            const auto a = random_input(8, rng), b = random_input(8, rng);
            double d = 0.0;
            for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
            CHECK(std::fabs(forward(a, w) - forward(b, w)) <= L * std::sqrt(d) + 1e-12);
        }
    }
}

TEST_CASE("gradient descent steps") {
    Rng rng(5);
    const NetworkSpec spec = NetworkSpec::three_layer(3, 2);
    const WeightBundle w = WeightBundle::glorot_uniform(spec, rng);
    const WeightBundle g = backward(random_input(3, rng), w, 1.0);

    CHECK(sgd_step(w, g, 0.0) == w);
    const auto before = w.flatten(), grads = g.flatten(), after = sgd_step(w, g, 0.125).flatten();
    for (std::size_t p = 0; p < after.size(); ++p) CHECK(after[p] == before[p] - 0.125 * grads[p]);

    WeightBundle bad = g;
    bad.weights[1](0, 0) = NAN;
    CHECK_THROWS_AS(sgd_step(w, bad, 0.1), std::runtime_error);

    SUBCASE("quadratic in the output bias converges to its minimum") {
        // loss = (v(x) - y)^2 / 2 with only the output bias trained; minimum at b* = b + y - v(x)
        const NetworkSpec lin{1, {}, Activation::identity};
        WeightBundle q = WeightBundle::zeros(lin);
        q.weights[0](0, 0) = 0.7;
        const double x = 2.0, y = -4.0;
        const double target = y - 0.7 * x;
        for (int it = 0; it < 200; ++it) {
            const double v = forward(std::span<const double>(&x, 1), q);
            WeightBundle grad = backward(std::span<const double>(&x, 1), q, v - y);
            grad.weights[0].setZero();
            q = sgd_step(q, grad, 0.1);
        }
        CHECK(std::fabs(q.biases[0][0] - target) < 1e-8);
    }
}

TEST_CASE("weight text round trip is exact") {
    Rng rng(6);
    NetworkSpec spec = NetworkSpec::three_layer(5, 3);
    WeightBundle w = WeightBundle::glorot_uniform(spec, rng);
    w.biases[1][2] = 1.0 / 3.0;
    w.weights[0](1, 1) = -5e-300;
    const LoadedWeights back = parse_weights(serialize_weights(w, 0x0123456789abcdefULL, "run.manifest.json"));
    CHECK(back.fingerprint == 0x0123456789abcdefULL);
    CHECK(back.weights.spec == spec);
    CHECK(back.weights == w);
    CHECK(back.weights.flatten() == w.flatten());

    spec.activation = Activation::identity;
    const WeightBundle z = WeightBundle::zeros(spec);
    CHECK(parse_weights(serialize_weights(z, 1)).weights.spec.activation == Activation::identity);
    CHECK_THROWS(parse_weights("# osp value-net v1\nlayers 3 2\n"));
    CHECK_THROWS(parse_weights("# osp value-net v1\nlayers 3 2 1\nactivation tanh\n"));
}
