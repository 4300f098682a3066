#pragma once

#include <cmath>
#include <cstdint>

#include "ddai/nn/model.hpp"

namespace ddai::nn {

struct AdamConfig {
    double learning_rate = 5e-4;
    double weight_decay = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

template <class S>
struct AdamState {
    AdamConfig config;
    Parameters<S> m;
    Parameters<S> v;
    std::int64_t t = 0;

    AdamState(const ModelConfig& model, AdamConfig cfg)
        : config(cfg), m(Parameters<S>::zeros(model)), v(Parameters<S>::zeros(model)) {}
};

/// Adam with coupled L2 decay: g' = g + weight_decay * param enters both moments.
template <class S>
void adam_step(Parameters<S>& params, const Parameters<S>& grads, AdamState<S>& state) {
    auto p = params.tensors();
    auto g = grads.tensors();
    auto m = state.m.tensors();
    auto v = state.v.tensors();
    if (g.size() != p.size() || m.size() != p.size() || v.size() != p.size())
        throw ShapeError("adam: parameter groups do not match");
    for (std::size_t i = 0; i < p.size(); ++i)
        if (g[i].values.size() != p[i].values.size() || m[i].values.size() != p[i].values.size())
            throw ShapeError("adam: shape mismatch in " + p[i].name);

    ++state.t;
    const auto& c = state.config;
    const S lr = static_cast<S>(c.learning_rate);
    const S wd = static_cast<S>(c.weight_decay);
    const S b1 = static_cast<S>(c.beta1);
    const S b2 = static_cast<S>(c.beta2);
    const S eps = static_cast<S>(c.epsilon);
    const S bias1 = static_cast<S>(1.0 - std::pow(c.beta1, static_cast<double>(state.t)));
    const S bias2 = static_cast<S>(1.0 - std::pow(c.beta2, static_cast<double>(state.t)));

    for (std::size_t i = 0; i < p.size(); ++i) {
        auto& pv = p[i].values;
        const auto& gv = g[i].values;
        auto& mv = m[i].values;
        auto& vv = v[i].values;
        for (Index k = 0; k < pv.size(); ++k) {
            const S grad = gv(k) + wd * pv(k);
            mv(k) = b1 * mv(k) + (S(1) - b1) * grad;
            vv(k) = b2 * vv(k) + (S(1) - b2) * grad * grad;
            const S m_hat = mv(k) / bias1;
            const S v_hat = vv(k) / bias2;
            pv(k) -= lr * m_hat / (std::sqrt(v_hat) + eps);
        }
    }
}

}  // namespace ddai::nn
