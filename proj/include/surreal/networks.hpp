#pragma once

#include "surreal/nn.hpp"

#include <cstdint>
#include <vector>

namespace surreal {

inline constexpr int kMaxPatterns = 8;

// Hidden widths shared by f, D and g2. Defaults are the published sizes;
// overrides exist for ablations and fast tests.
struct Architecture {
    int wide = 69;
    int narrow = 34;
    bool residual = true;  // false: y' is the decoder output alone, without the input added back
};

// f = x + decoder_y(encoder_x(x) * z_decoder(z)), with layers stored as
// [enc1, enc2, z_decoder, dec1, dec2]. Without the residual flag the x term
// is dropped.
namespace flayer {
inline constexpr std::size_t kEnc1 = 0;
inline constexpr std::size_t kEnc2 = 1;
inline constexpr std::size_t kLatent = 2;
inline constexpr std::size_t kDec1 = 3;
inline constexpr std::size_t kDec2 = 4;
}  // namespace flayer

struct ModelBundle {
    int num_patterns = 0;  // M
    int num_features = 0;  // S
    Architecture arch;

    nn::Params f;   // transformation
    nn::Params d;   // discriminator, softmax column 1 = "real"
    nn::Params g1;  // decomposer: leaky-relu on input, then S -> S*M linear
    nn::Params g2;  // reconstructor: S -> 1 per block, shared across blocks
};

ModelBundle init_bundle(int num_patterns, int num_features, std::uint64_t seed, Architecture arch = {});

// Throws ShapeError when any layer disagrees with (M, S, arch).
void validate_bundle(const ModelBundle& bundle);

struct EncodedInput {
    nn::DenseCache enc1;
    nn::DenseCache enc2;
    const Matrix& code() const { return enc2.output; }
};

struct DecodedOutput {
    nn::DenseCache latent;
    nn::DenseCache dec1;
    nn::DenseCache dec2;
    Matrix fused;
    Matrix transformed;
    const Matrix& output() const { return transformed; }
};

EncodedInput encode_input(const ModelBundle& bundle, const Matrix& x);
DecodedOutput decode_latent(const ModelBundle& bundle, const EncodedInput& encoded, const Matrix& z);

// Backward through one decode pass. Accumulates z_decoder/dec1/dec2 gradients
// into f_grads and returns d(loss)/d(code) for the shared encoder.
Matrix decode_backward(const ModelBundle& bundle, const EncodedInput& encoded, const DecodedOutput& decoded,
                       const Matrix& grad_output, nn::GradientSet& f_grads);
void encode_backward(const ModelBundle& bundle, const EncodedInput& encoded, const Matrix& grad_code,
                     nn::GradientSet& f_grads);

// y' = f(x, z). z must lie in [0, 1].
Matrix transform(const ModelBundle& bundle, const Matrix& x, const Matrix& z);

// n x 2 probabilities; column 1 is the probability of "real PT".
Matrix discriminate(const ModelBundle& bundle, const Matrix& y, std::vector<nn::DenseCache>* caches = nullptr);
Matrix discriminate_backward(const ModelBundle& bundle, const std::vector<nn::DenseCache>& caches,
                             const Matrix& grad_probs, nn::GradientSet* grads);

struct DecomposerCache {
    Matrix input;
    nn::DenseCache linear;
};

// n x (S*M): M contiguous blocks, block i estimating the change q_i.
Matrix decompose(const ModelBundle& bundle, const Matrix& y, DecomposerCache* cache = nullptr);
Matrix decompose_backward(const ModelBundle& bundle, const DecomposerCache& cache, const Matrix& grad_blocks,
                          nn::GradientSet* grads);

struct ReconstructorCache {
    std::vector<nn::DenseCache> layers;
    Eigen::Index rows = 0;
};

// Applies g2 to each S-wide block of g1's output; returns n x M in (0, 1).
Matrix reconstruct_from_blocks(const ModelBundle& bundle, const Matrix& blocks, ReconstructorCache* cache = nullptr);
Matrix reconstruct_backward(const ModelBundle& bundle, const ReconstructorCache& cache, const Matrix& grad_indices,
                            nn::GradientSet* grads);

// r = g2(g1(y)) blockwise.
Matrix reconstruct_indices(const ModelBundle& bundle, const Matrix& y);

}  // namespace surreal
