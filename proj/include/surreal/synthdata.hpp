#pragma once

#include "surreal/random.hpp"
#include "surreal/types.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace surreal::synth {

enum class Variant { Basic, LargeOverlap, Scarce, Noisy, Mild };

Variant variant_from_name(std::string_view name);
std::string_view variant_name(Variant variant);

struct PatternSpec {
    Variant variant = Variant::Basic;
    int num_features = 0;
    int pattern_size = 0;  // regions per pattern
    int overlap = 0;       // regions shared by every pair of patterns
    double atrophy = 0.3;  // alpha
    double noise = 0.05;   // sigma of the N(1, sigma) factor
    std::vector<std::vector<int>> patterns;  // sorted region indices

    int num_patterns() const { return static_cast<int>(patterns.size()); }
};

inline constexpr int kSyntheticPatterns = 3;

// Log-normal regional volumes: region medians U[2, 20], spread exp(N(0, 0.12)).
Matrix generate_baseline(Eigen::Index n, Eigen::Index num_features, Rng& rng);

PatternSpec build_pattern_spec(Variant variant, int num_features, Rng& rng);

// v <- v * (1 - s_k * N(1, sigma) * alpha) for each pattern k in order and
// each region of that pattern. Volumes that drop to <= 0 are clamped to 1e-6
// and counted in *clamped.
Matrix impose_patterns(const Matrix& baseline, const PatternSpec& spec, const Matrix& severities, Rng& rng,
                       long long* clamped = nullptr);

struct SyntheticCohort {
    Matrix cn;     // n_cn x S
    Matrix pt;     // n_pt x S
    Matrix truth;  // n_pt x M severities
    PatternSpec spec;
    std::uint64_t seed = 0;
    long long clamped = 0;
};

SyntheticCohort make_cohort(Variant variant, int n_cn = 492, int n_pt = 900, int num_features = 139,
                            std::uint64_t seed = 0);

}  // namespace surreal::synth
