#include "surreal/nn.hpp"

#include <algorithm>
#include <cmath>

namespace surreal::nn {

std::string_view activation_name(Activation activation)
{
    switch (activation) {
    case Activation::LeakyRelu:
        return "leaky_relu";
    case Activation::Sigmoid:
        return "sigmoid";
    case Activation::Softmax:
        return "softmax";
    case Activation::Identity:
        return "identity";
    }
    return "identity";
}

Activation activation_from_name(std::string_view name)
{
    if (name == "leaky_relu") return Activation::LeakyRelu;
    if (name == "sigmoid") return Activation::Sigmoid;
    if (name == "softmax") return Activation::Softmax;
    if (name == "identity") return Activation::Identity;
    throw ArgumentError("unknown activation '" + std::string(name) + "'");
}

DenseLayer make_dense(Eigen::Index in, Eigen::Index out, bool has_bias, Activation activation, Rng& rng)
{
    if (in < 1 || out < 1) {
        throw ArgumentError("dense layer sizes must be positive, got " + shape_string(out, in));
    }
    DenseLayer layer;
    layer.activation = activation;
    layer.has_bias = has_bias;
    const double a = std::sqrt(6.0 / static_cast<double>(in + out));
    layer.weights.resize(out, in);
    // Row-major fill order keeps the draw sequence independent of Eigen's storage order.
    for (Eigen::Index r = 0; r < out; ++r) {
        for (Eigen::Index c = 0; c < in; ++c) {
            layer.weights(r, c) = rng.uniform(-a, a);
        }
    }
    if (has_bias) {
        layer.bias = Vector::Zero(out);
    }
    return layer;
}

GradientSet zero_gradients(const Params& params)
{
    GradientSet grads(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
        grads[i].weights = Matrix::Zero(params[i].weights.rows(), params[i].weights.cols());
        grads[i].bias = Vector::Zero(params[i].bias.size());
    }
    return grads;
}

void scale_gradients(GradientSet& grads, double factor)
{
    for (auto& g : grads) {
        g.weights *= factor;
        g.bias *= factor;
    }
}

void add_gradients(GradientSet& into, const GradientSet& other)
{
    if (into.size() != other.size()) {
        throw ShapeError("gradient sets have different layer counts");
    }
    for (std::size_t i = 0; i < into.size(); ++i) {
        into[i].weights += other[i].weights;
        into[i].bias += other[i].bias;
    }
}

Matrix leaky_relu(const Matrix& pre)
{
    return pre.cwiseMax(0.0) + kLeakySlope * pre.cwiseMin(0.0);
}

Matrix leaky_relu_backward(const Matrix& pre, const Matrix& upstream)
{
    return (pre.array() > 0.0).select(upstream, kLeakySlope * upstream);
}

Matrix apply_activation(Activation activation, const Matrix& pre)
{
    switch (activation) {
    case Activation::LeakyRelu:
        return leaky_relu(pre);
    case Activation::Sigmoid:
        return (1.0 + (-pre.array()).exp()).inverse().matrix();
    case Activation::Softmax: {
        Matrix out(pre.rows(), pre.cols());
        for (Eigen::Index r = 0; r < pre.rows(); ++r) {
            const double peak = pre.row(r).maxCoeff();
            out.row(r) = (pre.row(r).array() - peak).exp().matrix();
            out.row(r) /= out.row(r).sum();
        }
        return out;
    }
    case Activation::Identity:
        return pre;
    }
    return pre;
}

Matrix dense_forward(const DenseLayer& layer, const Matrix& input, DenseCache* cache)
{
    require_cols(input, layer.in_size(), "dense_forward input");
    Matrix pre = input * layer.weights.transpose();
    if (layer.has_bias) {
        pre.rowwise() += layer.bias.transpose();
    }
    Matrix out = apply_activation(layer.activation, pre);
    if (cache != nullptr) {
        cache->input = input;
        cache->pre = std::move(pre);
        cache->output = out;
    }
    return out;
}

Matrix dense_backward(const DenseLayer& layer, const DenseCache& cache, const Matrix& upstream, LayerGrads* grads)
{
    require_shape(cache.input, cache.input.rows(), layer.in_size(), "dense_backward cached input");
    require_shape(upstream, cache.input.rows(), layer.out_size(), "dense_backward upstream");
    require_shape(cache.pre, upstream.rows(), upstream.cols(), "dense_backward cached pre-activation");

    Matrix grad_pre;
    switch (layer.activation) {
    case Activation::LeakyRelu:
        grad_pre = leaky_relu_backward(cache.pre, upstream);
        break;
    case Activation::Sigmoid:
        grad_pre = upstream.array() * cache.output.array() * (1.0 - cache.output.array());
        break;
    case Activation::Softmax: {
        const Vector dot = (upstream.array() * cache.output.array()).rowwise().sum();
        grad_pre = cache.output.array() * (upstream.colwise() - dot).array();
        break;
    }
    case Activation::Identity:
        grad_pre = upstream;
        break;
    }

    if (grads != nullptr) {
        if (grads->weights.size() == 0) {
            grads->weights = Matrix::Zero(layer.out_size(), layer.in_size());
        }
        grads->weights.noalias() += grad_pre.transpose() * cache.input;
        if (layer.has_bias) {
            if (grads->bias.size() == 0) {
                grads->bias = Vector::Zero(layer.out_size());
            }
            grads->bias += grad_pre.colwise().sum().transpose();
        }
    }
    return grad_pre * layer.weights;
}

Matrix forward_stack(const Params& params, const Matrix& input, std::vector<DenseCache>* caches)
{
    if (caches != nullptr) {
        caches->resize(params.size());
    }
    Matrix h = input;
    for (std::size_t i = 0; i < params.size(); ++i) {
        h = dense_forward(params[i], h, caches != nullptr ? &(*caches)[i] : nullptr);
    }
    return h;
}

Matrix backward_stack(const Params& params, const std::vector<DenseCache>& caches, const Matrix& upstream,
                      GradientSet* grads)
{
    if (caches.size() != params.size()) {
        throw ShapeError("backward_stack: cache count " + std::to_string(caches.size()) + " != layer count " +
                         std::to_string(params.size()));
    }
    Matrix g = upstream;
    for (std::size_t i = params.size(); i-- > 0;) {
        g = dense_backward(params[i], caches[i], g, grads != nullptr ? &(*grads)[i] : nullptr);
    }
    return g;
}

AdamState AdamState::for_params(const Params& params, double lr)
{
    AdamState state;
    state.lr = lr;
    state.m = zero_gradients(params);
    state.v = zero_gradients(params);
    return state;
}

void adam_step(AdamState& state, Params& params, const GradientSet& grads)
{
    if (grads.size() != params.size() || state.m.size() != params.size() || state.v.size() != params.size()) {
        throw ShapeError("adam_step: layer count mismatch between params, grads and state");
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        require_shape(grads[i].weights, params[i].weights.rows(), params[i].weights.cols(), "adam_step weight grad");
        if (params[i].has_bias && grads[i].bias.size() != params[i].bias.size()) {
            throw ShapeError("adam_step: bias gradient size mismatch in layer " + std::to_string(i));
        }
        if (!grads[i].weights.allFinite() || !grads[i].bias.allFinite()) {
            throw TrainingFault("non-finite gradient in layer " + std::to_string(i) + "; training diverged");
        }
    }

    state.step += 1;
    const double t = static_cast<double>(state.step);
    const double correction1 = 1.0 - std::pow(state.beta1, t);
    const double correction2 = 1.0 - std::pow(state.beta2, t);
    const double b1 = state.beta1;
    const double b2 = state.beta2;
    const double lr = state.lr;
    const double eps = state.epsilon;

    auto update = [&](auto& p, auto& m, auto& v, const auto& g) {
        m = b1 * m + (1.0 - b1) * g;
        v = b2 * v + (1.0 - b2) * g.cwiseAbs2();
        p.array() -= lr * (m.array() / correction1) / ((v.array() / correction2).sqrt() + eps);
    };
    for (std::size_t i = 0; i < params.size(); ++i) {
        update(params[i].weights, state.m[i].weights, state.v[i].weights, grads[i].weights);
        if (params[i].has_bias) {
            update(params[i].bias, state.m[i].bias, state.v[i].bias, grads[i].bias);
        }
    }
}

void clip_weights(Params& params, double bound)
{
    if (!(bound > 0.0)) {
        throw ArgumentError("clip bound must be positive");
    }
    for (auto& layer : params) {
        layer.weights = layer.weights.cwiseMax(-bound).cwiseMin(bound);
        if (layer.has_bias) {
            layer.bias = layer.bias.cwiseMax(-bound).cwiseMin(bound);
        }
    }
}

double max_abs_weight(const Params& params)
{
    double peak = 0.0;
    for (const auto& layer : params) {
        if (layer.weights.size() > 0) peak = std::max(peak, layer.weights.cwiseAbs().maxCoeff());
        if (layer.bias.size() > 0) peak = std::max(peak, layer.bias.cwiseAbs().maxCoeff());
    }
    return peak;
}

bool all_finite(const Params& params)
{
    return std::all_of(params.begin(), params.end(),
                       [](const DenseLayer& l) { return l.weights.allFinite() && l.bias.allFinite(); });
}

std::size_t parameter_count(const Params& params)
{
    std::size_t n = 0;
    for (const auto& layer : params) {
        n += static_cast<std::size_t>(layer.weights.size() + layer.bias.size());
    }
    return n;
}

GradientCheck finite_difference_check(Params& params, const LossEvaluator& loss, double h)
{
    GradientSet analytic = zero_gradients(params);
    loss(&analytic);

    GradientCheck worst;
    auto probe = [&](double& slot, double analytic_value, std::size_t layer, Eigen::Index row, Eigen::Index col,
                     bool in_bias) {
        const double saved = slot;
        slot = saved + h;
        const double up = loss(nullptr);
        slot = saved - h;
        const double down = loss(nullptr);
        slot = saved;
        const double numeric = (up - down) / (2.0 * h);
        const double denom = std::max({std::abs(analytic_value), std::abs(numeric), 1e-8});
        const double rel = std::abs(analytic_value - numeric) / denom;
        if (rel > worst.max_relative_error) {
            worst = GradientCheck{rel, layer, row, col, in_bias, analytic_value, numeric};
        }
    };

    for (std::size_t l = 0; l < params.size(); ++l) {
        auto& layer = params[l];
        for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
            for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) {
                probe(layer.weights(r, c), analytic[l].weights(r, c), l, r, c, false);
            }
        }
        if (layer.has_bias) {
            for (Eigen::Index r = 0; r < layer.bias.size(); ++r) {
                probe(layer.bias(r), analytic[l].bias(r), l, r, 0, true);
            }
        }
    }
    return worst;
}

}  // namespace surreal::nn
