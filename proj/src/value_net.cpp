#include "osp/value_net.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "osp/text_io.hpp"

namespace osp {

NetworkSpec NetworkSpec::three_layer(int input_size, int units) {
    return {input_size, {units, units, units}, Activation::relu};
}

void NetworkSpec::validate() const {
    if (input_size < 1) throw std::invalid_argument("network: input size must be >= 1");
    for (int h : hidden) {
        if (h < 1) throw std::invalid_argument("network: hidden layer sizes must be >= 1");
    }
}

std::vector<int> layer_sizes(const NetworkSpec& spec) {
    std::vector<int> sizes{spec.input_size};
    sizes.insert(sizes.end(), spec.hidden.begin(), spec.hidden.end());
    sizes.push_back(1);
    return sizes;
}

std::size_t NetworkSpec::parameter_count() const {
    const auto sizes = layer_sizes(*this);
    std::size_t n = 0;
    for (std::size_t k = 0; k + 1 < sizes.size(); ++k) {
        n += static_cast<std::size_t>(sizes[k]) * sizes[k + 1] + sizes[k + 1];
    }
    return n;
}

WeightBundle WeightBundle::zeros(const NetworkSpec& spec) {
    spec.validate();
    WeightBundle w;
    w.spec = spec;
    const auto sizes = layer_sizes(spec);
    for (std::size_t k = 0; k + 1 < sizes.size(); ++k) {
        w.weights.push_back(Eigen::MatrixXd::Zero(sizes[k + 1], sizes[k]));
        w.biases.push_back(Eigen::VectorXd::Zero(sizes[k + 1]));
    }
    return w;
}

WeightBundle WeightBundle::glorot_uniform(const NetworkSpec& spec, Rng& rng) {
    WeightBundle w = zeros(spec);
    for (auto& m : w.weights) {
        const double limit = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = (2.0 * uniform01(rng) - 1.0) * limit;
        }
    }
    return w;
}

std::vector<double> WeightBundle::flatten() const {
    std::vector<double> flat;
    flat.reserve(parameter_count());
    for (std::size_t k = 0; k < weights.size(); ++k) {
        for (Eigen::Index i = 0; i < weights[k].rows(); ++i) {
            for (Eigen::Index j = 0; j < weights[k].cols(); ++j) flat.push_back(weights[k](i, j));
        }
        for (Eigen::Index i = 0; i < biases[k].size(); ++i) flat.push_back(biases[k][i]);
    }
    return flat;
}

void WeightBundle::assign_flat(std::span<const double> values) {
    if (values.size() != parameter_count()) throw std::invalid_argument("network: flat parameter count mismatch");
    std::size_t p = 0;
    for (std::size_t k = 0; k < weights.size(); ++k) {
        for (Eigen::Index i = 0; i < weights[k].rows(); ++i) {
            for (Eigen::Index j = 0; j < weights[k].cols(); ++j) weights[k](i, j) = values[p++];
        }
        for (Eigen::Index i = 0; i < biases[k].size(); ++i) biases[k][i] = values[p++];
    }
}

bool WeightBundle::all_finite() const {
    for (std::size_t k = 0; k < weights.size(); ++k) {
        if (!weights[k].allFinite() || !biases[k].allFinite()) return false;
    }
    return true;
}

WeightBundle& WeightBundle::operator+=(const WeightBundle& other) {
    if (!(spec == other.spec)) throw std::invalid_argument("network: shape mismatch");
    for (std::size_t k = 0; k < weights.size(); ++k) {
        weights[k] += other.weights[k];
        biases[k] += other.biases[k];
    }
    return *this;
}

WeightBundle& WeightBundle::operator*=(double s) {
    for (std::size_t k = 0; k < weights.size(); ++k) {
        weights[k] *= s;
        biases[k] *= s;
    }
    return *this;
}

bool operator==(const WeightBundle& a, const WeightBundle& b) {
    if (!(a.spec == b.spec) || a.weights.size() != b.weights.size()) return false;
    for (std::size_t k = 0; k < a.weights.size(); ++k) {
        if (a.weights[k] != b.weights[k] || a.biases[k] != b.biases[k]) return false;
    }
    return true;
}

namespace {

void activate(Eigen::MatrixXd& z, Activation act) {
    if (act == Activation::relu) z = z.cwiseMax(0.0);
}

struct Trace {
    std::vector<Eigen::MatrixXd> pre;   // pre-activations of each hidden layer
    std::vector<Eigen::MatrixXd> post;  // post[0] = inputs, post[k] = layer k output
    Eigen::VectorXd output;
};

Trace run(const Eigen::MatrixXd& inputs, const WeightBundle& w) {
    if (inputs.rows() != w.spec.input_size) throw std::invalid_argument("network: input size mismatch");
    Trace t;
    t.post.push_back(inputs);
    const std::size_t layers = w.weights.size();
    for (std::size_t k = 0; k + 1 < layers; ++k) {
        Eigen::MatrixXd z = w.weights[k] * t.post.back();
        z.colwise() += w.biases[k];
        t.pre.push_back(z);
        activate(z, w.spec.activation);
        t.post.push_back(std::move(z));
    }
    Eigen::MatrixXd out = w.weights.back() * t.post.back();
    out.colwise() += w.biases.back();
    t.output = out.row(0).transpose();
    return t;
}

}  // namespace

Eigen::VectorXd forward_batch(const Eigen::MatrixXd& inputs, const WeightBundle& w) { return run(inputs, w).output; }

double forward(std::span<const double> input, const WeightBundle& w) {
    if (static_cast<int>(input.size()) != w.spec.input_size) {
        throw std::invalid_argument("network: input size mismatch");
    }
    const Eigen::Map<const Eigen::VectorXd> x(input.data(), static_cast<Eigen::Index>(input.size()));
    return forward_batch(x, w)[0];
}

WeightBundle backward_batch(const Eigen::MatrixXd& inputs, const WeightBundle& w, const Eigen::VectorXd& upstream) {
    if (upstream.size() != inputs.cols()) throw std::invalid_argument("network: upstream size mismatch");
    const Trace t = run(inputs, w);
    WeightBundle g = WeightBundle::zeros(w.spec);
    Eigen::MatrixXd delta = upstream.transpose();  // 1 x batch
    for (std::size_t k = w.weights.size(); k-- > 0;) {
        g.weights[k].noalias() = delta * t.post[k].transpose();
        g.biases[k] = delta.rowwise().sum();
        if (k == 0) break;
        Eigen::MatrixXd back = w.weights[k].transpose() * delta;
        if (w.spec.activation == Activation::relu) {
            back = back.cwiseProduct((t.pre[k - 1].array() > 0.0).cast<double>().matrix());
        }
        delta = std::move(back);
    }
    return g;
}

WeightBundle backward(std::span<const double> input, const WeightBundle& w, double upstream) {
    if (static_cast<int>(input.size()) != w.spec.input_size) {
        throw std::invalid_argument("network: input size mismatch");
    }
    const Eigen::Map<const Eigen::VectorXd> x(input.data(), static_cast<Eigen::Index>(input.size()));
    return backward_batch(x, w, Eigen::VectorXd::Constant(1, upstream));
}

WeightBundle sgd_step(WeightBundle w, const WeightBundle& grads, double lr) {
    if (!(w.spec == grads.spec)) throw std::invalid_argument("sgd: shape mismatch");
    if (!grads.all_finite()) throw std::runtime_error("sgd: non-finite gradient (training diverged)");
    for (std::size_t k = 0; k < w.weights.size(); ++k) {
        w.weights[k] -= lr * grads.weights[k];
        w.biases[k] -= lr * grads.biases[k];
    }
    return w;
}

double lipschitz_bound(const WeightBundle& w) {
    double bound = 1.0;
    for (const auto& m : w.weights) bound *= m.norm();
    return bound;
}

std::string serialize_weights(const WeightBundle& w, std::uint64_t fingerprint, const std::string& manifest) {
    std::string s = "# osp value-net v1\n";
    s += "layers";
    for (int n : layer_sizes(w.spec)) s += ' ' + std::to_string(n);
    s += '\n';
    s += std::string("activation ") + (w.spec.activation == Activation::relu ? "relu" : "identity") + '\n';
    s += "fingerprint " + hex64(fingerprint) + '\n';
    if (!manifest.empty()) s += "manifest " + manifest + '\n';
    for (std::size_t k = 0; k < w.weights.size(); ++k) {
        const auto& m = w.weights[k];
        s += "weight " + std::to_string(k) + ' ' + std::to_string(m.rows()) + ' ' + std::to_string(m.cols()) + '\n';
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            for (Eigen::Index j = 0; j < m.cols(); ++j) {
                if (j) s += ' ';
                s += format_double(m(i, j));
            }
            s += '\n';
        }
        s += "bias " + std::to_string(k) + ' ' + std::to_string(w.biases[k].size()) + '\n';
        for (Eigen::Index i = 0; i < w.biases[k].size(); ++i) {
            if (i) s += ' ';
            s += format_double(w.biases[k][i]);
        }
        s += '\n';
    }
    return s;
}

LoadedWeights parse_weights(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<int> sizes;
    NetworkSpec spec;
    LoadedWeights out;
    auto next_values = [&in, &line](std::size_t expected) {
        std::vector<double> vals;
        while (vals.size() < expected && std::getline(in, line)) {
            for (const auto& tok : split_ws(line)) vals.push_back(parse_double(tok));
        }
        if (vals.size() != expected) throw std::invalid_argument("weights: truncated numeric block");
        return vals;
    };
    bool shaped = false;
    std::size_t weight_blocks = 0, bias_blocks = 0;
    while (std::getline(in, line)) {
        const auto tok = split_ws(line);
        if (tok.empty() || tok[0][0] == '#') continue;
        if (tok[0] == "layers") {
            for (std::size_t i = 1; i < tok.size(); ++i) sizes.push_back(static_cast<int>(parse_int(tok[i])));
            if (sizes.size() < 2 || sizes.back() != 1) throw std::invalid_argument("weights: bad layer list");
        } else if (tok[0] == "activation" && tok.size() == 2) {
            if (tok[1] == "relu") spec.activation = Activation::relu;
            else if (tok[1] == "identity") spec.activation = Activation::identity;
            else throw std::invalid_argument("weights: unknown activation '" + tok[1] + "'");
        } else if (tok[0] == "fingerprint" && tok.size() == 2) {
            out.fingerprint = parse_hex64(tok[1]);
        } else if (tok[0] == "manifest") {
            continue;
        } else if ((tok[0] == "weight" && tok.size() == 4) || (tok[0] == "bias" && tok.size() == 3)) {
            if (!shaped) {
                if (sizes.empty()) throw std::invalid_argument("weights: block before layer list");
                spec.input_size = sizes.front();
                spec.hidden.assign(sizes.begin() + 1, sizes.end() - 1);
                out.weights = WeightBundle::zeros(spec);
                shaped = true;
            }
            const auto k = static_cast<std::size_t>(parse_int(tok[1]));
            if (k >= out.weights.weights.size()) throw std::invalid_argument("weights: layer index out of range");
            if (tok[0] == "weight") {
                auto& m = out.weights.weights[k];
                if (parse_int(tok[2]) != m.rows() || parse_int(tok[3]) != m.cols()) {
                    throw std::invalid_argument("weights: block shape mismatch");
                }
                const auto vals = next_values(static_cast<std::size_t>(m.size()));
                for (Eigen::Index i = 0; i < m.rows(); ++i)
                    for (Eigen::Index j = 0; j < m.cols(); ++j) {
                        m(i, j) = vals[static_cast<std::size_t>(i * m.cols() + j)];
                    }
                ++weight_blocks;
            } else {
                auto& b = out.weights.biases[k];
                if (parse_int(tok[2]) != b.size()) throw std::invalid_argument("weights: bias length mismatch");
                const auto vals = next_values(static_cast<std::size_t>(b.size()));
                for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = vals[static_cast<std::size_t>(i)];
                ++bias_blocks;
            }
        } else {
            throw std::invalid_argument("weights: unexpected line '" + std::string(trim(line)) + "'");
        }
    }
    if (!shaped || weight_blocks != out.weights.weights.size() || bias_blocks != out.weights.biases.size()) {
        throw std::invalid_argument("weights: missing blocks");
    }
    return out;
}

}  // namespace osp
