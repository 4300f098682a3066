#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ddai/nn/kernels.hpp"
#include "ddai/vectorizer.hpp"

namespace ddai::nn {

inline constexpr Index kOutputDim = 2;

struct ModelConfig {
    Index input_dim = 0;
    Index hidden_dim = 128;
    Index num_layers = 1;
    double dropout_p = 0.5;
    double bn_momentum = 0.1;
    double bn_eps = 1e-5;

    void validate() const {
        if (input_dim < 0 || hidden_dim < 1 || num_layers < 1)
            throw DomainError("model needs input_dim >= 0, hidden_dim >= 1, num_layers >= 1");
        if (!(dropout_p >= 0.0 && dropout_p < 1.0))
            throw DomainError("dropout probability must be in [0, 1)");
        if (!(bn_momentum > 0.0 && bn_momentum <= 1.0) || !(bn_eps >= 0.0))
            throw DomainError("bad batch-norm momentum/eps");
    }

    bool operator==(const ModelConfig&) const = default;
};

template <class S>
struct NamedTensor {
    std::string name;
    Eigen::Map<Vector<S>> values;
};

template <class S>
struct NamedConstTensor {
    std::string name;
    Eigen::Map<const Vector<S>> values;
};

/// Every trainable array of the classifier. Also used for gradients and
/// optimizer moments, which have identical shapes.
template <class S>
struct Parameters {
    std::vector<LstmLayer<S>> lstm;
    Vector<S> bn_gamma;
    Vector<S> bn_beta;
    Matrix<S> fc_weight;  // 2 x H
    Vector<S> fc_bias;    // 2

    static Parameters zeros(const ModelConfig& cfg) {
        Parameters p;
        for (Index l = 0; l < cfg.num_layers; ++l)
            p.lstm.push_back(
                LstmLayer<S>::zeros(l == 0 ? cfg.input_dim : cfg.hidden_dim, cfg.hidden_dim));
        p.bn_gamma = Vector<S>::Zero(cfg.hidden_dim);
        p.bn_beta = Vector<S>::Zero(cfg.hidden_dim);
        p.fc_weight = Matrix<S>::Zero(kOutputDim, cfg.hidden_dim);
        p.fc_bias = Vector<S>::Zero(kOutputDim);
        return p;
    }

    /// Flat views in a fixed order; names are stable and used in checkpoints.
    std::vector<NamedTensor<S>> tensors() {
        std::vector<NamedTensor<S>> out;
        auto add = [&out](std::string name, auto& m) {
            out.push_back({std::move(name), Eigen::Map<Vector<S>>(m.data(), m.size())});
        };
        for (std::size_t l = 0; l < lstm.size(); ++l) {
            const auto prefix = "lstm." + std::to_string(l) + ".";
            add(prefix + "w_input", lstm[l].w_input);
            add(prefix + "w_hidden", lstm[l].w_hidden);
            add(prefix + "bias", lstm[l].bias);
        }
        add("bn.gamma", bn_gamma);
        add("bn.beta", bn_beta);
        add("fc.weight", fc_weight);
        add("fc.bias", fc_bias);
        return out;
    }

    std::vector<NamedConstTensor<S>> tensors() const {
        std::vector<NamedConstTensor<S>> out;
        for (auto& t : const_cast<Parameters*>(this)->tensors())
            out.push_back({t.name, Eigen::Map<const Vector<S>>(t.values.data(), t.values.size())});
        return out;
    }

    Index parameter_count() const {
        Index n = 0;
        for (const auto& t : tensors()) n += t.values.size();
        return n;
    }

    template <class T>
    Parameters<T> cast() const {
        Parameters<T> p;
        for (const auto& layer : lstm)
            p.lstm.push_back({layer.w_input.template cast<T>(), layer.w_hidden.template cast<T>(),
                              layer.bias.template cast<T>()});
        p.bn_gamma = bn_gamma.template cast<T>();
        p.bn_beta = bn_beta.template cast<T>();
        p.fc_weight = fc_weight.template cast<T>();
        p.fc_bias = fc_bias.template cast<T>();
        return p;
    }

    bool operator==(const Parameters& o) const {
        if (lstm.size() != o.lstm.size()) return false;
        auto a = tensors();
        auto b = o.tensors();
        for (std::size_t i = 0; i < a.size(); ++i)
            if (a[i].values.size() != b[i].values.size() || a[i].values != b[i].values) return false;
        return true;
    }
};

/// LSTM (one timestep) -> batch norm -> ReLU -> dropout -> fully connected (2 logits).
template <class S>
struct LstmClassifier {
    ModelConfig config;
    Parameters<S> params;
    BatchNormRunning<S> bn_running;

    /// All weights zero, gamma = 1, running stats (0, 1).
    static LstmClassifier zeros(const ModelConfig& cfg) {
        cfg.validate();
        LstmClassifier m{cfg, Parameters<S>::zeros(cfg), BatchNormRunning<S>::init(cfg.hidden_dim)};
        m.params.bn_gamma.setOnes();
        return m;
    }

    /// Weight matrices ~ U(-k, k) with k = 1/sqrt(hidden_dim); biases zero
    /// except the forget gate (+1); gamma = 1, beta = 0.
    static LstmClassifier initialized(const ModelConfig& cfg, std::uint64_t seed) {
        auto m = zeros(cfg);
        Rng rng(seed);
        const double k = 1.0 / std::sqrt(static_cast<double>(cfg.hidden_dim));
        auto fill = [&](auto& mat) {
            S* data = mat.data();
            for (Index i = 0; i < mat.size(); ++i)
                data[i] = static_cast<S>((2.0 * uniform01(rng) - 1.0) * k);
        };
        for (auto& layer : m.params.lstm) {
            fill(layer.w_input);
            fill(layer.w_hidden);
            layer.bias.segment(cfg.hidden_dim, cfg.hidden_dim).setOnes();
        }
        fill(m.params.fc_weight);
        return m;
    }

    template <class T>
    LstmClassifier<T> cast() const {
        return {config, params.template cast<T>(),
                {bn_running.mean.template cast<T>(), bn_running.var.template cast<T>()}};
    }

    bool operator==(const LstmClassifier& o) const {
        return config == o.config && params == o.params && bn_running.mean == o.bn_running.mean &&
               bn_running.var == o.bn_running.var;
    }
};

/// Column per document, input_dim rows.
template <class S>
SparseBatch<S> to_sparse_batch(std::span<const CountVector> docs, Index input_dim) {
    std::vector<Eigen::Triplet<S>> triplets;
    for (std::size_t c = 0; c < docs.size(); ++c)
        for (const auto& e : docs[c].entries) {
            if (e.index < 0 || e.index >= input_dim)
                throw ShapeError("count vector index " + std::to_string(e.index) +
                                 " outside input_dim " + std::to_string(input_dim));
            triplets.emplace_back(e.index, static_cast<Index>(c), static_cast<S>(e.count));
        }
    SparseBatch<S> batch(input_dim, static_cast<Index>(docs.size()));
    batch.setFromTriplets(triplets.begin(), triplets.end());
    return batch;
}

template <class S>
Vector<S> to_dense(const CountVector& doc, Index input_dim) {
    Vector<S> v = Vector<S>::Zero(input_dim);
    for (const auto& e : doc.entries) {
        if (e.index < 0 || e.index >= input_dim) throw ShapeError("count vector index outside input_dim");
        v(e.index) = static_cast<S>(e.count);
    }
    return v;
}

/// Everything backward needs from one forward call.
template <class S>
struct ModelTape {
    SparseBatch<S> input;
    std::vector<LstmTape<S>> lstm;
    std::vector<Matrix<S>> hidden;  // output of each LSTM layer
    BatchNormTape<S> bn;
    Matrix<S> bn_out;               // ReLU input
    Matrix<S> dropout_mask;
    Matrix<S> fc_input;
    bool consumed = false;
};

template <class S>
struct ForwardPass {
    Matrix<S> logits;  // 2 x B
    ModelTape<S> tape;
};

/// Pure in both modes. In train mode the batch statistics are returned in
/// the tape; `commit_batch_stats` folds them into the running averages.
template <class S>
ForwardPass<S> model_forward(const LstmClassifier<S>& model, const SparseBatch<S>& x, Mode mode,
                             Rng* rng = nullptr) {
    const auto& cfg = model.config;
    if (x.rows() != cfg.input_dim)
        throw ShapeError("input has " + std::to_string(x.rows()) + " features, model expects " +
                         std::to_string(cfg.input_dim));
    ForwardPass<S> out;
    auto& tape = out.tape;
    tape.input = x;
    for (std::size_t l = 0; l < model.params.lstm.size(); ++l) {
        auto step = l == 0 ? lstm_forward(model.params.lstm[l], x)
                           : lstm_forward(model.params.lstm[l], tape.hidden.back());
        tape.lstm.push_back(std::move(step.tape));
        tape.hidden.push_back(std::move(step.h));
    }
    auto bn = batchnorm_forward<S>(tape.hidden.back(), model.params.bn_gamma, model.params.bn_beta,
                                   mode, model.bn_running, static_cast<S>(cfg.bn_eps));
    tape.bn = std::move(bn.tape);
    tape.bn_out = std::move(bn.y);
    Matrix<S> activated = relu(tape.bn_out);
    auto dropped = dropout_forward<S>(activated, cfg.dropout_p, mode, rng);
    tape.dropout_mask = std::move(dropped.mask);
    tape.fc_input = std::move(dropped.z);
    out.logits = fc_forward<S>(tape.fc_input, model.params.fc_weight, model.params.fc_bias);
    return out;
}

template <class S>
void commit_batch_stats(LstmClassifier<S>& model, const ModelTape<S>& tape) {
    if (tape.bn.mode != Mode::Train) return;
    model.bn_running.absorb(tape.bn.batch_mean, tape.bn.batch_var, tape.input.cols(),
                            static_cast<S>(model.config.bn_momentum));
}

/// Gradients of the loss whose logit gradient is `d_logits`. Consumes the tape.
template <class S>
Parameters<S> model_backward(const LstmClassifier<S>& model, ModelTape<S>&& tape,
                             const Matrix<S>& d_logits) {
    if (tape.consumed) throw DomainError("forward tape already consumed");
    tape.consumed = true;
    Parameters<S> grads;
    auto fc = fc_backward<S>(tape.fc_input, model.params.fc_weight, d_logits);
    grads.fc_weight = std::move(fc.d_weight);
    grads.fc_bias = std::move(fc.d_bias);
    Matrix<S> d_act = dropout_backward<S>(tape.dropout_mask, fc.d_input);
    Matrix<S> d_bn_out = relu_backward<S>(tape.bn_out, d_act);
    auto bn = batchnorm_backward<S>(tape.bn, model.params.bn_gamma, d_bn_out);
    grads.bn_gamma = std::move(bn.d_gamma);
    grads.bn_beta = std::move(bn.d_beta);

    const std::size_t layers = model.params.lstm.size();
    grads.lstm.resize(layers);
    Matrix<S> dh = std::move(bn.d_input);
    for (std::size_t l = layers; l-- > 0;) {
        const bool below = l > 0;
        LstmGrads<S> g = below ? lstm_backward(model.params.lstm[l], tape.hidden[l - 1], tape.lstm[l],
                                               dh, {}, true)
                               : lstm_backward(model.params.lstm[l], tape.input, tape.lstm[l], dh);
        grads.lstm[l] = std::move(g.params);
        if (below) dh = std::move(g.d_input);
    }
    return grads;
}

}  // namespace ddai::nn
