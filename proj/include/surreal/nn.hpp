#pragma once

#include "surreal/random.hpp"
#include "surreal/types.hpp"

#include <functional>
#include <string_view>
#include <vector>

// Dense layers with hand-written backward passes, ADAM and weight clipping.
// Everything here works on batches laid out one sample per row.
namespace surreal::nn {

inline constexpr double kLeakySlope = 0.2;

enum class Activation { LeakyRelu, Sigmoid, Softmax, Identity };

std::string_view activation_name(Activation activation);
Activation activation_from_name(std::string_view name);

struct DenseLayer {
    Matrix weights;  // out x in
    Vector bias;     // size out when has_bias, otherwise empty
    bool has_bias = false;
    Activation activation = Activation::Identity;

    Eigen::Index in_size() const { return weights.cols(); }
    Eigen::Index out_size() const { return weights.rows(); }
};

// Weights of one network, in forward order.
using Params = std::vector<DenseLayer>;

struct DenseCache {
    Matrix input;
    Matrix pre;  // input * W^T (+ bias)
    Matrix output;
};

struct LayerGrads {
    Matrix weights;
    Vector bias;
};

using GradientSet = std::vector<LayerGrads>;

// Glorot-uniform weights U[-a, a], a = sqrt(6 / (in + out)); zero bias.
DenseLayer make_dense(Eigen::Index in, Eigen::Index out, bool has_bias, Activation activation, Rng& rng);

GradientSet zero_gradients(const Params& params);
void scale_gradients(GradientSet& grads, double factor);
void add_gradients(GradientSet& into, const GradientSet& other);

Matrix leaky_relu(const Matrix& pre);
// Multiplies upstream by the leaky-relu derivative evaluated at pre.
Matrix leaky_relu_backward(const Matrix& pre, const Matrix& upstream);
Matrix apply_activation(Activation activation, const Matrix& pre);

Matrix dense_forward(const DenseLayer& layer, const Matrix& input, DenseCache* cache = nullptr);

// Returns d(loss)/d(input). Weight and bias gradients are accumulated into
// *grads when it is non-null, so a layer used by several forward passes can
// collect all contributions before one optimizer step.
Matrix dense_backward(const DenseLayer& layer, const DenseCache& cache, const Matrix& upstream,
                      LayerGrads* grads);

// Forward through a stack of layers; caches is resized to params.size().
Matrix forward_stack(const Params& params, const Matrix& input, std::vector<DenseCache>* caches);
Matrix backward_stack(const Params& params, const std::vector<DenseCache>& caches, const Matrix& upstream,
                      GradientSet* grads);

struct AdamState {
    double lr = 2e-4;
    double beta1 = 0.5;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    long long step = 0;
    GradientSet m;
    GradientSet v;

    static AdamState for_params(const Params& params, double lr);
};

// Bias-corrected ADAM. Throws TrainingFault when a gradient is not finite;
// in that case neither params nor state are modified.
void adam_step(AdamState& state, Params& params, const GradientSet& grads);

// Clamps every weight and bias entry into [-bound, bound].
void clip_weights(Params& params, double bound);

double max_abs_weight(const Params& params);
bool all_finite(const Params& params);
std::size_t parameter_count(const Params& params);

// Loss evaluator for gradient checks. When grads is non-null it must be
// filled with the analytic gradient of the returned loss.
using LossEvaluator = std::function<double(GradientSet* grads)>;

struct GradientCheck {
    double max_relative_error = 0.0;
    std::size_t layer = 0;
    Eigen::Index row = 0;
    Eigen::Index col = 0;
    bool in_bias = false;
    double analytic = 0.0;
    double numeric = 0.0;
};

// Central differences over every parameter. Relative error per entry is
// |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
GradientCheck finite_difference_check(Params& params, const LossEvaluator& loss, double h);

}  // namespace surreal::nn
