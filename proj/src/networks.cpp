#include "surreal/networks.hpp"

namespace surreal {

using nn::Activation;

ModelBundle init_bundle(int num_patterns, int num_features, std::uint64_t seed, Architecture arch)
{
    if (num_patterns < 1 || num_features < 1) {
        throw ArgumentError("init_bundle: M and S must be positive, got M=" + std::to_string(num_patterns) +
                            " S=" + std::to_string(num_features));
    }
    if (num_patterns > kMaxPatterns) {
        throw ArgumentError("init_bundle: M=" + std::to_string(num_patterns) + " exceeds the supported maximum " +
                            std::to_string(kMaxPatterns));
    }
    if (arch.wide < 1 || arch.narrow < 1) {
        throw ArgumentError("init_bundle: hidden widths must be positive");
    }

    const Eigen::Index m = num_patterns;
    const Eigen::Index s = num_features;
    Rng rng(seed);
    ModelBundle b;
    b.num_patterns = num_patterns;
    b.num_features = num_features;
    b.arch = arch;

    b.f.push_back(nn::make_dense(s, arch.wide, false, Activation::LeakyRelu, rng));
    b.f.push_back(nn::make_dense(arch.wide, arch.narrow, false, Activation::LeakyRelu, rng));
    b.f.push_back(nn::make_dense(m, arch.narrow, true, Activation::Sigmoid, rng));
    b.f.push_back(nn::make_dense(arch.narrow, arch.wide, false, Activation::LeakyRelu, rng));
    b.f.push_back(nn::make_dense(arch.wide, s, false, Activation::LeakyRelu, rng));

    b.d.push_back(nn::make_dense(s, arch.wide, true, Activation::LeakyRelu, rng));
    b.d.push_back(nn::make_dense(arch.wide, arch.narrow, true, Activation::LeakyRelu, rng));
    b.d.push_back(nn::make_dense(arch.narrow, 2, true, Activation::Softmax, rng));

    b.g1.push_back(nn::make_dense(s, s * m, true, Activation::Identity, rng));

    b.g2.push_back(nn::make_dense(s, arch.wide, true, Activation::LeakyRelu, rng));
    b.g2.push_back(nn::make_dense(arch.wide, arch.narrow, true, Activation::LeakyRelu, rng));
    b.g2.push_back(nn::make_dense(arch.narrow, 1, true, Activation::Sigmoid, rng));
    return b;
}

namespace {

struct LayerSpec {
    Eigen::Index in;
    Eigen::Index out;
    bool bias;
    Activation activation;
};

void check_layers(const nn::Params& params, const std::vector<LayerSpec>& specs, const std::string& name)
{
    if (params.size() != specs.size()) {
        throw ShapeError(name + ": expected " + std::to_string(specs.size()) + " layers, got " +
                         std::to_string(params.size()));
    }
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const auto& layer = params[i];
        const auto& spec = specs[i];
        const std::string where = name + " layer " + std::to_string(i);
        require_shape(layer.weights, spec.out, spec.in, where + " weights");
        if (layer.has_bias != spec.bias) {
            throw ShapeError(where + ": bias flag mismatch");
        }
        if (layer.has_bias && layer.bias.size() != spec.out) {
            throw ShapeError(where + ": bias length " + std::to_string(layer.bias.size()) + " != " +
                             std::to_string(spec.out));
        }
        if (!layer.has_bias && layer.bias.size() != 0) {
            throw ShapeError(where + ": unexpected bias values");
        }
        if (layer.activation != spec.activation) {
            throw ShapeError(where + ": activation mismatch");
        }
    }
}

}  // namespace

void validate_bundle(const ModelBundle& b)
{
    const Eigen::Index m = b.num_patterns;
    const Eigen::Index s = b.num_features;
    const Eigen::Index w = b.arch.wide;
    const Eigen::Index n = b.arch.narrow;
    if (m < 1 || s < 1 || m > kMaxPatterns) {
        throw ShapeError("bundle declares invalid M=" + std::to_string(m) + " S=" + std::to_string(s));
    }
    check_layers(b.f,
                 {{s, w, false, Activation::LeakyRelu},
                  {w, n, false, Activation::LeakyRelu},
                  {m, n, true, Activation::Sigmoid},
                  {n, w, false, Activation::LeakyRelu},
                  {w, s, false, Activation::LeakyRelu}},
                 "f");
    check_layers(b.d,
                 {{s, w, true, Activation::LeakyRelu},
                  {w, n, true, Activation::LeakyRelu},
                  {n, 2, true, Activation::Softmax}},
                 "D");
    check_layers(b.g1, {{s, s * m, true, Activation::Identity}}, "g1");
    check_layers(b.g2,
                 {{s, w, true, Activation::LeakyRelu},
                  {w, n, true, Activation::LeakyRelu},
                  {n, 1, true, Activation::Sigmoid}},
                 "g2");
}

EncodedInput encode_input(const ModelBundle& bundle, const Matrix& x)
{
    require_cols(x, bundle.num_features, "transform input x");
    EncodedInput enc;
    nn::dense_forward(bundle.f[flayer::kEnc1], x, &enc.enc1);
    nn::dense_forward(bundle.f[flayer::kEnc2], enc.enc1.output, &enc.enc2);
    return enc;
}

DecodedOutput decode_latent(const ModelBundle& bundle, const EncodedInput& encoded, const Matrix& z)
{
    require_shape(z, encoded.code().rows(), bundle.num_patterns, "transform latent z");
    DecodedOutput dec;
    nn::dense_forward(bundle.f[flayer::kLatent], z, &dec.latent);
    dec.fused = encoded.code().cwiseProduct(dec.latent.output);
    nn::dense_forward(bundle.f[flayer::kDec1], dec.fused, &dec.dec1);
    nn::dense_forward(bundle.f[flayer::kDec2], dec.dec1.output, &dec.dec2);
    dec.transformed = bundle.arch.residual ? Matrix(encoded.enc1.input + dec.dec2.output) : dec.dec2.output;
    return dec;
}

Matrix decode_backward(const ModelBundle& bundle, const EncodedInput& encoded, const DecodedOutput& decoded,
                       const Matrix& grad_output, nn::GradientSet& f_grads)
{
    Matrix g = nn::dense_backward(bundle.f[flayer::kDec2], decoded.dec2, grad_output, &f_grads[flayer::kDec2]);
    const Matrix grad_fused = nn::dense_backward(bundle.f[flayer::kDec1], decoded.dec1, g, &f_grads[flayer::kDec1]);
    const Matrix grad_latent = grad_fused.cwiseProduct(encoded.code());
    nn::dense_backward(bundle.f[flayer::kLatent], decoded.latent, grad_latent, &f_grads[flayer::kLatent]);
    return grad_fused.cwiseProduct(decoded.latent.output);
}

void encode_backward(const ModelBundle& bundle, const EncodedInput& encoded, const Matrix& grad_code,
                     nn::GradientSet& f_grads)
{
    const Matrix g = nn::dense_backward(bundle.f[flayer::kEnc2], encoded.enc2, grad_code, &f_grads[flayer::kEnc2]);
    nn::dense_backward(bundle.f[flayer::kEnc1], encoded.enc1, g, &f_grads[flayer::kEnc1]);
}

Matrix transform(const ModelBundle& bundle, const Matrix& x, const Matrix& z)
{
    require_shape(z, x.rows(), bundle.num_patterns, "transform latent z");
    if (z.size() > 0 && (z.minCoeff() < 0.0 || z.maxCoeff() > 1.0)) {
        throw ArgumentError("transform: latent entries must lie in [0, 1]");
    }
    const EncodedInput enc = encode_input(bundle, x);
    return decode_latent(bundle, enc, z).transformed;
}

Matrix discriminate(const ModelBundle& bundle, const Matrix& y, std::vector<nn::DenseCache>* caches)
{
    require_cols(y, bundle.num_features, "discriminate input");
    return nn::forward_stack(bundle.d, y, caches);
}

Matrix discriminate_backward(const ModelBundle& bundle, const std::vector<nn::DenseCache>& caches,
                             const Matrix& grad_probs, nn::GradientSet* grads)
{
    return nn::backward_stack(bundle.d, caches, grad_probs, grads);
}

Matrix decompose(const ModelBundle& bundle, const Matrix& y, DecomposerCache* cache)
{
    require_cols(y, bundle.num_features, "decompose input");
    Matrix activated = nn::leaky_relu(y);
    if (cache == nullptr) {
        return nn::dense_forward(bundle.g1.front(), activated, nullptr);
    }
    cache->input = y;
    return nn::dense_forward(bundle.g1.front(), activated, &cache->linear);
}

Matrix decompose_backward(const ModelBundle& bundle, const DecomposerCache& cache, const Matrix& grad_blocks,
                          nn::GradientSet* grads)
{
    const Matrix g = nn::dense_backward(bundle.g1.front(), cache.linear, grad_blocks,
                                        grads != nullptr ? &grads->front() : nullptr);
    return nn::leaky_relu_backward(cache.input, g);
}

Matrix reconstruct_from_blocks(const ModelBundle& bundle, const Matrix& blocks, ReconstructorCache* cache)
{
    const Eigen::Index s = bundle.num_features;
    const Eigen::Index m = bundle.num_patterns;
    const Eigen::Index n = blocks.rows();
    require_cols(blocks, s * m, "reconstruct blocks");

    // Stack block k of every row at rows [k*n, (k+1)*n) so g2 runs as one batch.
    Matrix stacked(n * m, s);
    for (Eigen::Index k = 0; k < m; ++k) {
        stacked.middleRows(k * n, n) = blocks.middleCols(k * s, s);
    }
    const Matrix out = nn::forward_stack(bundle.g2, stacked, cache != nullptr ? &cache->layers : nullptr);
    if (cache != nullptr) {
        cache->rows = n;
    }
    Matrix r(n, m);
    for (Eigen::Index k = 0; k < m; ++k) {
        r.col(k) = out.col(0).segment(k * n, n);
    }
    return r;
}

Matrix reconstruct_backward(const ModelBundle& bundle, const ReconstructorCache& cache, const Matrix& grad_indices,
                            nn::GradientSet* grads)
{
    const Eigen::Index s = bundle.num_features;
    const Eigen::Index m = bundle.num_patterns;
    const Eigen::Index n = cache.rows;
    require_shape(grad_indices, n, m, "reconstruct_backward upstream");

    Matrix stacked_grad(n * m, 1);
    for (Eigen::Index k = 0; k < m; ++k) {
        stacked_grad.col(0).segment(k * n, n) = grad_indices.col(k);
    }
    const Matrix g = nn::backward_stack(bundle.g2, cache.layers, stacked_grad, grads);
    Matrix grad_blocks(n, s * m);
    for (Eigen::Index k = 0; k < m; ++k) {
        grad_blocks.middleCols(k * s, s) = g.middleRows(k * n, n);
    }
    return grad_blocks;
}

Matrix reconstruct_indices(const ModelBundle& bundle, const Matrix& y)
{
    return reconstruct_from_blocks(bundle, decompose(bundle, y));
}

}  // namespace surreal
