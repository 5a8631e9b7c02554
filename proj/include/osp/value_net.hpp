#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "osp/rng.hpp"

namespace osp {

enum class Activation { relu, identity };

/// Fully connected scalar regressor: rectifier (or identity) hidden layers and
/// an identity output unit.
struct NetworkSpec {
    int input_size = 1;
    std::vector<int> hidden;
    Activation activation = Activation::relu;

    /// Three hidden layers of `units` each.
    static NetworkSpec three_layer(int input_size, int units);
    std::size_t parameter_count() const;
    void validate() const;
    friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

/// Layer k maps layer_sizes[k] -> layer_sizes[k+1]: weights[k] is out x in.
/// Flat order is layer by layer, row-major weights then biases.
struct WeightBundle {
    NetworkSpec spec;
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;

    static WeightBundle zeros(const NetworkSpec& spec);
    /// Uniform in +-sqrt(6 / (fan_in + fan_out)) per layer, zero biases.
    static WeightBundle glorot_uniform(const NetworkSpec& spec, Rng& rng);

    std::vector<double> flatten() const;
    void assign_flat(std::span<const double> values);
    bool all_finite() const;
    std::size_t parameter_count() const { return spec.parameter_count(); }

    WeightBundle& operator+=(const WeightBundle& other);
    WeightBundle& operator*=(double s);
    friend bool operator==(const WeightBundle&, const WeightBundle&);
};

std::vector<int> layer_sizes(const NetworkSpec& spec);

/// Throws std::invalid_argument on a wrong input length.
double forward(std::span<const double> input, const WeightBundle& w);
/// Column j of `inputs` is one sample; returns one output per column.
Eigen::VectorXd forward_batch(const Eigen::MatrixXd& inputs, const WeightBundle& w);

/// Gradient of upstream * output with respect to every weight and bias.
WeightBundle backward(std::span<const double> input, const WeightBundle& w, double upstream);
/// Sum over columns of the per-sample gradients weighted by `upstream`.
WeightBundle backward_batch(const Eigen::MatrixXd& inputs, const WeightBundle& w, const Eigen::VectorXd& upstream);

/// Plain gradient descent: w - lr * grads. Throws std::runtime_error on
/// non-finite gradients.
WeightBundle sgd_step(WeightBundle w, const WeightBundle& grads, double lr);

/// Product of per-layer Frobenius norms; bounds the network's Lipschitz constant
/// in the Euclidean norm because the rectifier is 1-Lipschitz.
double lipschitz_bound(const WeightBundle& w);

std::string serialize_weights(const WeightBundle& w, std::uint64_t fingerprint, const std::string& manifest = "");
struct LoadedWeights {
    WeightBundle weights;
    std::uint64_t fingerprint = 0;
};
LoadedWeights parse_weights(const std::string& text);

}  // namespace osp
