#pragma once

#include <Eigen/Core>
#include <cmath>
#include <vector>

#include "hiernav/errors.hpp"
#include "hiernav/mlp.hpp"

namespace hiernav {

enum class OptimizerVariant { SGD, Adam };

struct OptimizerConfig {
    double learning_rate = 1e-3;
    OptimizerVariant variant = OptimizerVariant::Adam;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// Owns the per-parameter state (Adam moments, step count) for one network.
// A step never changes parameter shapes.
class Optimizer {
public:
    Optimizer(const Mlp& net, OptimizerConfig cfg) : cfg_(cfg) {
        if (!(cfg.learning_rate > 0.0)) throw Error("optimizer: learning rate must be positive");
        if (cfg_.variant == OptimizerVariant::Adam) {
            for (int l = 0; l < net.layer_count(); ++l) {
                m_w_.push_back(Eigen::MatrixXd::Zero(net.weights[l].rows(), net.weights[l].cols()));
                v_w_.push_back(Eigen::MatrixXd::Zero(net.weights[l].rows(), net.weights[l].cols()));
                m_b_.push_back(Eigen::VectorXd::Zero(net.biases[l].size()));
                v_b_.push_back(Eigen::VectorXd::Zero(net.biases[l].size()));
            }
        }
    }

    const OptimizerConfig& config() const { return cfg_; }
    long step_count() const { return step_; }

    void apply(Mlp& net, const Gradients& grads) {
        check_shapes(net, grads);
        check_finite(grads);
        ++step_;
        if (cfg_.variant == OptimizerVariant::SGD) {
            for (int l = 0; l < net.layer_count(); ++l) {
                net.weights[l] -= cfg_.learning_rate * grads.weights[l];
                net.biases[l] -= cfg_.learning_rate * grads.biases[l];
            }
            return;
        }
        const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
        const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
        for (int l = 0; l < net.layer_count(); ++l) {
            adam_step(net.weights[l], grads.weights[l], m_w_[l], v_w_[l], bc1, bc2);
            adam_step(net.biases[l], grads.biases[l], m_b_[l], v_b_[l], bc1, bc2);
        }
    }

private:
    template <typename T, typename G>
    void adam_step(T& param, const G& grad, T& m, T& v, double bc1, double bc2) {
        m = cfg_.beta1 * m + (1.0 - cfg_.beta1) * grad;
        v = cfg_.beta2 * v + (1.0 - cfg_.beta2) * grad.cwiseProduct(grad);
        param.array() -=
            cfg_.learning_rate * (m.array() / bc1) / ((v.array() / bc2).sqrt() + cfg_.epsilon);
    }

    void check_shapes(const Mlp& net, const Gradients& grads) const {
        if (static_cast<int>(grads.weights.size()) != net.layer_count() ||
            static_cast<int>(grads.biases.size()) != net.layer_count())
            throw ShapeError("apply_gradients: layer count mismatch");
        for (int l = 0; l < net.layer_count(); ++l) {
            if (grads.weights[l].rows() != net.weights[l].rows() ||
                grads.weights[l].cols() != net.weights[l].cols() ||
                grads.biases[l].size() != net.biases[l].size())
                throw ShapeError("apply_gradients: gradient shape mismatch at layer " +
                                 std::to_string(l));
        }
    }

    static void check_finite(const Gradients& grads) {
        for (const auto& w : grads.weights)
            if (!w.allFinite()) throw NumericError("apply_gradients: non-finite weight gradient");
        for (const auto& b : grads.biases)
            if (!b.allFinite()) throw NumericError("apply_gradients: non-finite bias gradient");
    }

    OptimizerConfig cfg_;
    long step_ = 0;
    std::vector<Eigen::MatrixXd> m_w_, v_w_;
    std::vector<Eigen::VectorXd> m_b_, v_b_;
};

inline void apply_gradients(Mlp& net, const Gradients& grads, Optimizer& opt) {
    opt.apply(net, grads);
}

}  // namespace hiernav
