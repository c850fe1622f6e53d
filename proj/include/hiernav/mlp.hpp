#pragma once

#include <Eigen/Core>
#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "hiernav/errors.hpp"
#include "hiernav/rng.hpp"

namespace hiernav {

enum class Activation { Identity, ReLU, Tanh };

inline std::string activation_name(Activation a) {
    switch (a) {
        case Activation::Identity: return "identity";
        case Activation::ReLU: return "relu";
        case Activation::Tanh: return "tanh";
    }
    throw Error("unknown activation");
}

inline Activation activation_from_name(const std::string& name) {
    if (name == "identity") return Activation::Identity;
    if (name == "relu") return Activation::ReLU;
    if (name == "tanh") return Activation::Tanh;
    throw ParseError("unknown activation name: " + name);
}

// Plain fully-connected network. weights[l] has shape
// (layer_sizes[l+1] x layer_sizes[l]); hidden layers use hidden_activation,
// the last layer uses output_activation.
struct Mlp {
    std::vector<int> layer_sizes;
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
    Activation hidden_activation = Activation::ReLU;
    Activation output_activation = Activation::Identity;

    int input_dim() const { return layer_sizes.front(); }
    int output_dim() const { return layer_sizes.back(); }
    int layer_count() const { return static_cast<int>(weights.size()); }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const auto& w : weights) n += static_cast<std::size_t>(w.size());
        for (const auto& b : biases) n += static_cast<std::size_t>(b.size());
        return n;
    }
};

// Parameters drawn uniformly from [-1/sqrt(fan_in), +1/sqrt(fan_in)].
// A zero-dimensional input layer gets bound 1 for its biases.
inline Mlp make_mlp(const std::vector<int>& layer_sizes, Activation output_activation, Rng& rng,
                    Activation hidden_activation = Activation::ReLU) {
    if (layer_sizes.size() < 2) throw ShapeError("mlp needs at least input and output sizes");
    for (std::size_t i = 0; i < layer_sizes.size(); ++i) {
        if (layer_sizes[i] < 0 || (i > 0 && layer_sizes[i] == 0))
            throw ShapeError("mlp layer sizes must be positive");
    }
    Mlp net;
    net.layer_sizes = layer_sizes;
    net.hidden_activation = hidden_activation;
    net.output_activation = output_activation;
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        const int in = layer_sizes[l];
        const int out = layer_sizes[l + 1];
        const double bound = in > 0 ? 1.0 / std::sqrt(static_cast<double>(in)) : 1.0;
        Eigen::MatrixXd w(out, in);
        for (int r = 0; r < out; ++r)
            for (int c = 0; c < in; ++c) w(r, c) = rng.uniform(-bound, bound);
        Eigen::VectorXd b(out);
        for (int r = 0; r < out; ++r) b(r) = rng.uniform(-bound, bound);
        net.weights.push_back(std::move(w));
        net.biases.push_back(std::move(b));
    }
    return net;
}

inline Mlp make_zero_mlp(const std::vector<int>& layer_sizes, Activation output_activation,
                         Activation hidden_activation = Activation::ReLU) {
    Rng rng(0);
    Mlp net = make_mlp(layer_sizes, output_activation, rng, hidden_activation);
    for (auto& w : net.weights) w.setZero();
    for (auto& b : net.biases) b.setZero();
    return net;
}

namespace detail {

inline void apply_activation(Activation a, Eigen::MatrixXd& x) {
    switch (a) {
        case Activation::Identity: return;
        case Activation::ReLU: x = x.cwiseMax(0.0); return;
        case Activation::Tanh: x = x.array().tanh().matrix(); return;
    }
}

// Derivative evaluated from (pre, post) activation values. ReLU uses
// subgradient 0 at exactly 0.
inline Eigen::ArrayXXd activation_derivative(Activation a, const Eigen::MatrixXd& pre,
                                             const Eigen::MatrixXd& post) {
    switch (a) {
        case Activation::Identity: return Eigen::ArrayXXd::Ones(pre.rows(), pre.cols());
        case Activation::ReLU: return (pre.array() > 0.0).cast<double>();
        case Activation::Tanh: return 1.0 - post.array().square();
    }
    throw Error("unknown activation");
}

}  // namespace detail

// Rows are samples: X is (batch x input_dim).
struct ForwardTrace {
    Eigen::MatrixXd input;
    std::vector<Eigen::MatrixXd> pre;   // per layer, batch x layer_out
    std::vector<Eigen::MatrixXd> post;  // per layer, after activation
};

inline ForwardTrace forward_trace(const Mlp& net, const Eigen::MatrixXd& x) {
    if (x.cols() != net.input_dim())
        throw ShapeError("forward: input has " + std::to_string(x.cols()) +
                         " columns, network expects " + std::to_string(net.input_dim()));
    ForwardTrace t;
    t.input = x;
    Eigen::MatrixXd cur = x;
    const int L = net.layer_count();
    for (int l = 0; l < L; ++l) {
        Eigen::MatrixXd pre = cur * net.weights[l].transpose();
        pre.rowwise() += net.biases[l].transpose();
        Eigen::MatrixXd post = pre;
        detail::apply_activation(l + 1 == L ? net.output_activation : net.hidden_activation, post);
        t.pre.push_back(std::move(pre));
        cur = post;
        t.post.push_back(std::move(post));
    }
    return t;
}

inline Eigen::MatrixXd forward_batch(const Mlp& net, const Eigen::MatrixXd& x) {
    if (x.cols() != net.input_dim())
        throw ShapeError("forward: input has " + std::to_string(x.cols()) +
                         " columns, network expects " + std::to_string(net.input_dim()));
    Eigen::MatrixXd cur = x;
    const int L = net.layer_count();
    for (int l = 0; l < L; ++l) {
        Eigen::MatrixXd pre = cur * net.weights[l].transpose();
        pre.rowwise() += net.biases[l].transpose();
        detail::apply_activation(l + 1 == L ? net.output_activation : net.hidden_activation, pre);
        cur = std::move(pre);
    }
    return cur;
}

inline Eigen::VectorXd forward(const Mlp& net, const Eigen::VectorXd& x) {
    if (x.size() != net.input_dim())
        throw ShapeError("forward: input has dim " + std::to_string(x.size()) +
                         ", network expects " + std::to_string(net.input_dim()));
    return forward_batch(net, x.transpose()).row(0).transpose();
}

// Gradients of a scalar loss, summed over the batch. `input` is dL/dX, which
// the actor update uses to push critic gradients into the policy.
struct Gradients {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
    Eigen::MatrixXd input;
};

inline Gradients backward(const Mlp& net, const ForwardTrace& trace,
                          const Eigen::MatrixXd& upstream) {
    const int L = net.layer_count();
    if (upstream.rows() != trace.input.rows() || upstream.cols() != net.output_dim())
        throw ShapeError("backward: upstream gradient shape mismatch");
    Gradients g;
    g.weights.resize(L);
    g.biases.resize(L);
    Eigen::MatrixXd delta =
        upstream.cwiseProduct(detail::activation_derivative(net.output_activation, trace.pre[L - 1],
                                                            trace.post[L - 1])
                                  .matrix());
    for (int l = L - 1; l >= 0; --l) {
        const Eigen::MatrixXd& layer_in = l == 0 ? trace.input : trace.post[l - 1];
        g.weights[l] = delta.transpose() * layer_in;
        g.biases[l] = delta.colwise().sum().transpose();
        Eigen::MatrixXd down = delta * net.weights[l];
        if (l > 0) {
            delta = down.cwiseProduct(
                detail::activation_derivative(net.hidden_activation, trace.pre[l - 1],
                                              trace.post[l - 1])
                    .matrix());
        } else {
            g.input = std::move(down);
        }
    }
    return g;
}

// Single-sample form: gradients of upstream . f(x) with respect to every
// weight and bias.
inline Gradients backward(const Mlp& net, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& upstream) {
    ForwardTrace t = forward_trace(net, x.transpose());
    return backward(net, t, upstream.transpose());
}

// target <- rho * target + (1 - rho) * source, elementwise.
inline void polyak_update(Mlp& target, const Mlp& source, double rho) {
    if (target.layer_sizes != source.layer_sizes)
        throw ShapeError("polyak_update: architecture mismatch");
    if (!(rho >= 0.0 && rho <= 1.0)) throw Error("polyak_update: rho must be in [0,1]");
    for (int l = 0; l < target.layer_count(); ++l) {
        target.weights[l] = rho * target.weights[l] + (1.0 - rho) * source.weights[l];
        target.biases[l] = rho * target.biases[l] + (1.0 - rho) * source.biases[l];
    }
}

inline nlohmann::json to_json(const Mlp& net) {
    nlohmann::json j;
    j["version"] = 1;
    j["layer_sizes"] = net.layer_sizes;
    nlohmann::json weights = nlohmann::json::array();
    for (const auto& w : net.weights) {
        nlohmann::json rows = nlohmann::json::array();
        for (int r = 0; r < w.rows(); ++r) {
            nlohmann::json row = nlohmann::json::array();
            for (int c = 0; c < w.cols(); ++c) row.push_back(w(r, c));
            rows.push_back(std::move(row));
        }
        weights.push_back(std::move(rows));
    }
    j["weights"] = std::move(weights);
    nlohmann::json biases = nlohmann::json::array();
    for (const auto& b : net.biases) {
        nlohmann::json vec = nlohmann::json::array();
        for (int r = 0; r < b.size(); ++r) vec.push_back(b(r));
        biases.push_back(std::move(vec));
    }
    j["biases"] = std::move(biases);
    j["activations"] = {{"hidden", activation_name(net.hidden_activation)},
                        {"output", activation_name(net.output_activation)}};
    return j;
}

inline Mlp mlp_from_json(const nlohmann::json& j) {
    if (!j.contains("version") || j.at("version").get<int>() != 1)
        throw ParseError("network document: unsupported or missing version");
    Mlp net;
    net.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
    net.hidden_activation = activation_from_name(j.at("activations").at("hidden"));
    net.output_activation = activation_from_name(j.at("activations").at("output"));
    const auto& weights = j.at("weights");
    const auto& biases = j.at("biases");
    if (weights.size() + 1 != net.layer_sizes.size() || biases.size() != weights.size())
        throw ParseError("network document: layer count mismatch");
    for (std::size_t l = 0; l + 1 < net.layer_sizes.size(); ++l) {
        const int out = net.layer_sizes[l + 1];
        const int in = net.layer_sizes[l];
        const auto& wj = weights[l];
        if (static_cast<int>(wj.size()) != out) throw ParseError("network document: weight rows mismatch");
        Eigen::MatrixXd w(out, in);
        for (int r = 0; r < out; ++r) {
            if (static_cast<int>(wj[r].size()) != in)
                throw ParseError("network document: weight cols mismatch");
            for (int c = 0; c < in; ++c) w(r, c) = wj[r][c].get<double>();
        }
        const auto& bj = biases[l];
        if (static_cast<int>(bj.size()) != out) throw ParseError("network document: bias size mismatch");
        Eigen::VectorXd b(out);
        for (int r = 0; r < out; ++r) b(r) = bj[r].get<double>();
        net.weights.push_back(std::move(w));
        net.biases.push_back(std::move(b));
    }
    return net;
}

}  // namespace hiernav
