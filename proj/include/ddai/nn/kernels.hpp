#pragma once

// Forward/backward kernels. Batches are stored column-per-example: a batch of
// B vectors of width D is a D x B matrix.

#include <cmath>
#include <span>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "ddai/errors.hpp"
#include "ddai/seed.hpp"

namespace ddai::nn {

template <class S>
using Matrix = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <class S>
using Vector = Eigen::Matrix<S, Eigen::Dynamic, 1>;
template <class S>
using SparseBatch = Eigen::SparseMatrix<S, Eigen::ColMajor>;

using Index = Eigen::Index;

enum class Mode { Train, Eval };

namespace detail {

inline std::string shape_str(Index r, Index c) {
    return std::to_string(r) + "x" + std::to_string(c);
}

template <class S>
S sigmoid(S x) {
    return S(1) / (S(1) + std::exp(-x));
}

}  // namespace detail

// ---------------------------------------------------------------- LSTM

/// One LSTM layer. Gate blocks are stacked [input, forget, cell, output],
/// each `hidden` rows tall.
template <class S>
struct LstmLayer {
    Matrix<S> w_input;   // 4H x D
    Matrix<S> w_hidden;  // 4H x H
    Vector<S> bias;      // 4H

    Index hidden_dim() const { return w_hidden.cols(); }
    Index input_dim() const { return w_input.cols(); }

    static LstmLayer zeros(Index input_dim, Index hidden_dim) {
        return {Matrix<S>::Zero(4 * hidden_dim, input_dim),
                Matrix<S>::Zero(4 * hidden_dim, hidden_dim), Vector<S>::Zero(4 * hidden_dim)};
    }
};

template <class S>
struct LstmTape {
    Matrix<S> h0, c0;   // empty when the initial state is zero
    Matrix<S> gates;    // 4H x B, post-activation
    Matrix<S> tanh_c;   // H x B
};

template <class S>
struct LstmOutput {
    Matrix<S> h;
    Matrix<S> c;
    LstmTape<S> tape;
};

/// Single timestep. `h0`/`c0` may be empty matrices, meaning zero state.
template <class S, class Input>
LstmOutput<S> lstm_forward(const LstmLayer<S>& layer, const Input& x, const Matrix<S>& h0 = {},
                           const Matrix<S>& c0 = {}) {
    const Index H = layer.hidden_dim();
    const Index B = x.cols();
    if (x.rows() != layer.input_dim())
        throw ShapeError("lstm input " + detail::shape_str(x.rows(), x.cols()) +
                         " does not match input_dim " + std::to_string(layer.input_dim()));
    if (h0.size() != 0 && (h0.rows() != H || h0.cols() != B))
        throw ShapeError("lstm h0 has shape " + detail::shape_str(h0.rows(), h0.cols()));
    if (c0.size() != 0 && (c0.rows() != H || c0.cols() != B))
        throw ShapeError("lstm c0 has shape " + detail::shape_str(c0.rows(), c0.cols()));

    LstmOutput<S> out;
    auto& tape = out.tape;
    tape.gates = layer.w_input * x;
    tape.gates.colwise() += layer.bias;
    if (h0.size() != 0) tape.gates.noalias() += layer.w_hidden * h0;

    auto sig = [](S v) { return detail::sigmoid(v); };
    auto th = [](S v) { return std::tanh(v); };
    tape.gates.topRows(2 * H) = tape.gates.topRows(2 * H).unaryExpr(sig);
    tape.gates.middleRows(2 * H, H) = tape.gates.middleRows(2 * H, H).unaryExpr(th);
    tape.gates.bottomRows(H) = tape.gates.bottomRows(H).unaryExpr(sig);

    auto i = tape.gates.topRows(H).array();
    auto g = tape.gates.middleRows(2 * H, H).array();
    auto o = tape.gates.bottomRows(H).array();
    out.c = (i * g).matrix();
    if (c0.size() != 0) out.c.array() += tape.gates.middleRows(H, H).array() * c0.array();
    tape.tanh_c = out.c.array().tanh().matrix();
    out.h = (o * tape.tanh_c.array()).matrix();
    tape.h0 = h0;
    tape.c0 = c0;
    return out;
}

template <class S>
struct LstmGrads {
    LstmLayer<S> params;
    Matrix<S> d_input;  // filled only when requested
    Matrix<S> d_h0, d_c0;
};

/// `dc` may be empty (no gradient flowing into the cell state from above).
template <class S, class Input>
LstmGrads<S> lstm_backward(const LstmLayer<S>& layer, const Input& x, const LstmTape<S>& tape,
                           const Matrix<S>& dh, const Matrix<S>& dc = {},
                           bool want_input_grad = false) {
    const Index H = layer.hidden_dim();
    const Index B = x.cols();
    auto i = tape.gates.topRows(H).array();
    auto f = tape.gates.middleRows(H, H).array();
    auto g = tape.gates.middleRows(2 * H, H).array();
    auto o = tape.gates.bottomRows(H).array();
    auto tc = tape.tanh_c.array();

    Matrix<S> dc_total = (dh.array() * o * (S(1) - tc.square())).matrix();
    if (dc.size() != 0) dc_total += dc;

    Matrix<S> da(4 * H, B);
    da.topRows(H) = (dc_total.array() * g * i * (S(1) - i)).matrix();
    if (tape.c0.size() != 0)
        da.middleRows(H, H) = (dc_total.array() * tape.c0.array() * f * (S(1) - f)).matrix();
    else
        da.middleRows(H, H).setZero();
    da.middleRows(2 * H, H) = (dc_total.array() * i * (S(1) - g.square())).matrix();
    da.bottomRows(H) = (dh.array() * tc * o * (S(1) - o)).matrix();

    LstmGrads<S> grads;
    grads.params.w_input = da * x.transpose();
    if (tape.h0.size() != 0) {
        grads.params.w_hidden = da * tape.h0.transpose();
        grads.d_h0 = layer.w_hidden.transpose() * da;
    } else {
        grads.params.w_hidden = Matrix<S>::Zero(4 * H, H);
        grads.d_h0 = Matrix<S>::Zero(H, B);
    }
    grads.params.bias = da.rowwise().sum();
    grads.d_c0 = (dc_total.array() * f).matrix();
    if (want_input_grad) grads.d_input = layer.w_input.transpose() * da;
    return grads;
}

// ---------------------------------------------------------------- batch norm

/// Running statistics used in eval mode.
template <class S>
struct BatchNormRunning {
    Vector<S> mean;
    Vector<S> var;

    static BatchNormRunning init(Index features) {
        return {Vector<S>::Zero(features), Vector<S>::Ones(features)};
    }

    /// Exponential moving average with the batch statistics. The stored variance
    /// is the unbiased estimate, so `batch_var` (population) is rescaled by n/(n-1).
    void absorb(const Vector<S>& batch_mean, const Vector<S>& batch_var, Index n, S momentum) {
        const S unbias = S(n) / S(n - 1);
        mean = (S(1) - momentum) * mean + momentum * batch_mean;
        var = (S(1) - momentum) * var + (momentum * unbias) * batch_var;
    }
};

template <class S>
struct BatchNormTape {
    Mode mode = Mode::Train;
    Matrix<S> x_hat;
    Vector<S> inv_std;
    Vector<S> batch_mean;  // train mode only
    Vector<S> batch_var;   // population variance, train mode only
};

template <class S>
struct BatchNormOutput {
    Matrix<S> y;
    BatchNormTape<S> tape;
};

/// Train mode normalizes with batch statistics (population variance) and
/// returns them in the tape; fold them into `running` with `absorb`.
template <class S>
BatchNormOutput<S> batchnorm_forward(const Matrix<S>& h, const Vector<S>& gamma,
                                     const Vector<S>& beta, Mode mode,
                                     const BatchNormRunning<S>& running, S eps) {
    if (gamma.size() != h.rows() || beta.size() != h.rows())
        throw ShapeError("batch-norm parameters do not match feature count " +
                         std::to_string(h.rows()));
    BatchNormOutput<S> out;
    auto& tape = out.tape;
    tape.mode = mode;
    if (mode == Mode::Train) {
        if (h.cols() < 2)
            throw DomainError("batch normalization in train mode needs a batch of at least 2");
        tape.batch_mean = h.rowwise().mean();
        Matrix<S> centered = h.colwise() - tape.batch_mean;
        tape.batch_var = centered.array().square().rowwise().mean().matrix();
        tape.inv_std = (tape.batch_var.array() + eps).rsqrt().matrix();
        tape.x_hat = centered.array().colwise() * tape.inv_std.array();
    } else {
        if (running.mean.size() != h.rows())
            throw ShapeError("batch-norm running statistics do not match feature count");
        tape.inv_std = (running.var.array() + eps).rsqrt().matrix();
        tape.x_hat = (h.colwise() - running.mean).array().colwise() * tape.inv_std.array();
    }
    out.y = (tape.x_hat.array().colwise() * gamma.array()).matrix();
    out.y.colwise() += beta;
    return out;
}

template <class S>
struct BatchNormGrads {
    Matrix<S> d_input;
    Vector<S> d_gamma;
    Vector<S> d_beta;
};

template <class S>
BatchNormGrads<S> batchnorm_backward(const BatchNormTape<S>& tape, const Vector<S>& gamma,
                                     const Matrix<S>& dy) {
    BatchNormGrads<S> g;
    g.d_beta = dy.rowwise().sum();
    g.d_gamma = (dy.array() * tape.x_hat.array()).rowwise().sum().matrix();
    Matrix<S> dx_hat = dy.array().colwise() * gamma.array();
    if (tape.mode == Mode::Eval) {
        g.d_input = dx_hat.array().colwise() * tape.inv_std.array();
        return g;
    }
    const S n = S(dy.cols());
    Vector<S> sum_dxh = dx_hat.rowwise().sum();
    Vector<S> sum_dxh_xh = (dx_hat.array() * tape.x_hat.array()).rowwise().sum().matrix();
    Matrix<S> inner = (n * dx_hat.array()).colwise() - sum_dxh.array();
    inner.array() -= tape.x_hat.array().colwise() * sum_dxh_xh.array();
    g.d_input = inner.array().colwise() * (tape.inv_std.array() / n);
    return g;
}

// ---------------------------------------------------------------- dropout

template <class S>
struct DropoutOutput {
    Matrix<S> z;
    Matrix<S> mask;  // 0 or 1/(1-p); empty means identity
};

/// Inverted dropout. Eval mode (or p == 0) is the exact identity.
template <class S>
DropoutOutput<S> dropout_forward(const Matrix<S>& y, double p, Mode mode, Rng* rng) {
    if (!(p >= 0.0 && p < 1.0)) throw DomainError("dropout probability must be in [0, 1)");
    DropoutOutput<S> out;
    if (mode == Mode::Eval || p == 0.0) {
        out.z = y;
        return out;
    }
    if (rng == nullptr) throw DomainError("train-mode dropout needs a random generator");
    const S keep_scale = S(1) / S(1.0 - p);
    out.mask.resize(y.rows(), y.cols());
    for (Index c = 0; c < y.cols(); ++c)
        for (Index r = 0; r < y.rows(); ++r)
            out.mask(r, c) = uniform01(*rng) < p ? S(0) : keep_scale;
    out.z = (y.array() * out.mask.array()).matrix();
    return out;
}

template <class S>
Matrix<S> dropout_backward(const Matrix<S>& mask, const Matrix<S>& dz) {
    if (mask.size() == 0) return dz;
    return (dz.array() * mask.array()).matrix();
}

// ---------------------------------------------------------------- ReLU

template <class Derived>
auto relu(const Eigen::MatrixBase<Derived>& z) {
    using S = typename Derived::Scalar;
    return z.cwiseMax(S(0));
}

/// Gradient passes where the forward input was strictly positive.
template <class S>
Matrix<S> relu_backward(const Matrix<S>& input, const Matrix<S>& dout) {
    return (input.array() > S(0)).select(dout, Matrix<S>::Zero(dout.rows(), dout.cols()));
}

// ---------------------------------------------------------------- fully connected

template <class S>
Matrix<S> fc_forward(const Matrix<S>& a, const Matrix<S>& w, const Vector<S>& b) {
    if (a.rows() != w.cols() || b.size() != w.rows())
        throw ShapeError("fc input " + detail::shape_str(a.rows(), a.cols()) + " vs weight " +
                         detail::shape_str(w.rows(), w.cols()));
    Matrix<S> out = w * a;
    out.colwise() += b;
    return out;
}

template <class S>
struct FcGrads {
    Matrix<S> d_weight;
    Vector<S> d_bias;
    Matrix<S> d_input;
};

template <class S>
FcGrads<S> fc_backward(const Matrix<S>& a, const Matrix<S>& w, const Matrix<S>& dlogits) {
    return {dlogits * a.transpose(), dlogits.rowwise().sum(), w.transpose() * dlogits};
}

// ---------------------------------------------------------------- loss

template <class S>
struct LossOutput {
    S loss = S(0);
    Matrix<S> d_logits;
};

/// Column-wise softmax with max subtraction.
template <class S>
Matrix<S> softmax(const Matrix<S>& logits) {
    Matrix<S> shifted = logits.rowwise() - logits.colwise().maxCoeff();
    Matrix<S> e = shifted.array().exp().matrix();
    return e.array().rowwise() / e.colwise().sum().array();
}

/// Mean cross-entropy over the batch; d_logits = (softmax - onehot) / B.
template <class S>
LossOutput<S> softmax_cross_entropy(const Matrix<S>& logits, std::span<const int> labels) {
    const Index B = logits.cols();
    if (static_cast<Index>(labels.size()) != B)
        throw ShapeError("got " + std::to_string(labels.size()) + " labels for " +
                         std::to_string(B) + " logit columns");
    if (!logits.allFinite()) throw NumericError("non-finite logits");

    LossOutput<S> out;
    out.d_logits.resize(logits.rows(), B);
    double total = 0.0;
    for (Index c = 0; c < B; ++c) {
        const int y = labels[static_cast<std::size_t>(c)];
        if (y < 0 || y >= logits.rows()) throw DomainError("label out of range: " + std::to_string(y));
        Index top = 0;
        const S m = logits.col(c).maxCoeff(&top);
        S others = S(0);
        for (Index r = 0; r < logits.rows(); ++r)
            if (r != top) others += std::exp(logits(r, c) - m);
        const S log_z = m + std::log1p(others);
        total += static_cast<double>((m - logits(y, c)) + std::log1p(others));
        out.d_logits.col(c) = (logits.col(c).array() - log_z).exp().matrix();
        out.d_logits(y, c) -= S(1);
    }
    out.d_logits /= S(B);
    out.loss = static_cast<S>(total / static_cast<double>(B));
    return out;
}

}  // namespace ddai::nn
