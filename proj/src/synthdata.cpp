#include "surreal/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace surreal::synth {

Variant variant_from_name(std::string_view name)
{
    if (name == "basic") return Variant::Basic;
    if (name == "large_overlap") return Variant::LargeOverlap;
    if (name == "scarce") return Variant::Scarce;
    if (name == "noisy") return Variant::Noisy;
    if (name == "mild") return Variant::Mild;
    throw ArgumentError("unknown variant '" + std::string(name) +
                        "' (expected basic, large_overlap, scarce, noisy or mild)");
}

std::string_view variant_name(Variant variant)
{
    switch (variant) {
    case Variant::Basic: return "basic";
    case Variant::LargeOverlap: return "large_overlap";
    case Variant::Scarce: return "scarce";
    case Variant::Noisy: return "noisy";
    case Variant::Mild: return "mild";
    }
    return "basic";
}

Matrix generate_baseline(Eigen::Index n, Eigen::Index num_features, Rng& rng)
{
    if (n < 1 || num_features < 1) {
        throw ArgumentError("generate_baseline: n and S must be positive");
    }
    Vector median(num_features);
    for (Eigen::Index j = 0; j < num_features; ++j) median(j) = rng.uniform(2.0, 20.0);
    Matrix v(n, num_features);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < num_features; ++j) {
            v(i, j) = median(j) * std::exp(rng.normal(0.0, 0.12));
        }
    }
    return v;
}

PatternSpec build_pattern_spec(Variant variant, int num_features, Rng& rng)
{
    PatternSpec spec;
    spec.variant = variant;
    spec.num_features = num_features;
    switch (variant) {
    case Variant::Basic: spec.pattern_size = 14; spec.overlap = 4; break;
    case Variant::LargeOverlap: spec.pattern_size = 14; spec.overlap = 8; break;
    case Variant::Scarce: spec.pattern_size = 4; spec.overlap = 0; break;
    case Variant::Noisy: spec.pattern_size = 14; spec.overlap = 4; spec.noise = 0.2; break;
    case Variant::Mild: spec.pattern_size = 14; spec.overlap = 4; spec.atrophy = 0.2; break;
    }

    // Three patterns with |P_i| = size and |P_i n P_j| = overlap. Regions in
    // all three patterns are used only when pairwise-exclusive sharing cannot
    // fit inside one pattern.
    const int size = spec.pattern_size;
    const int overlap = spec.overlap;
    const int shared_by_all = std::max(0, 2 * overlap - size);
    const int shared_by_pair = overlap - shared_by_all;
    const int unique = size - shared_by_all - 2 * shared_by_pair;
    const int needed = shared_by_all + 3 * shared_by_pair + 3 * unique;
    if (num_features < needed) {
        throw ArgumentError("build_pattern_spec: variant '" + std::string(variant_name(variant)) + "' needs at least " +
                            std::to_string(needed) + " features, got " + std::to_string(num_features));
    }

    std::vector<int> regions(static_cast<std::size_t>(num_features));
    std::iota(regions.begin(), regions.end(), 0);
    std::shuffle(regions.begin(), regions.end(), rng.engine());
    auto cursor = regions.begin();
    auto take = [&](int count) {
        std::vector<int> out(cursor, cursor + count);
        cursor += count;
        return out;
    };

    spec.patterns.assign(kSyntheticPatterns, {});
    auto append = [&](std::initializer_list<int> targets, const std::vector<int>& block) {
        for (int t : targets) spec.patterns[static_cast<std::size_t>(t)].insert(
            spec.patterns[static_cast<std::size_t>(t)].end(), block.begin(), block.end());
    };
    append({0, 1, 2}, take(shared_by_all));
    append({0, 1}, take(shared_by_pair));
    append({0, 2}, take(shared_by_pair));
    append({1, 2}, take(shared_by_pair));
    for (int k = 0; k < kSyntheticPatterns; ++k) append({k}, take(unique));
    for (auto& p : spec.patterns) std::sort(p.begin(), p.end());
    return spec;
}

Matrix impose_patterns(const Matrix& baseline, const PatternSpec& spec, const Matrix& severities, Rng& rng,
                       long long* clamped)
{
    require_shape(severities, baseline.rows(), spec.num_patterns(), "impose_patterns severities");
    if (severities.size() > 0 && (severities.minCoeff() < 0.0 || severities.maxCoeff() > 1.0)) {
        throw ArgumentError("impose_patterns: severities must lie in [0, 1]");
    }
    for (const auto& pattern : spec.patterns) {
        for (int region : pattern) {
            if (region < 0 || region >= baseline.cols()) {
                throw ArgumentError("impose_patterns: region index " + std::to_string(region) + " out of range");
            }
        }
    }

    Matrix v = baseline;
    long long clamp_count = 0;
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
        for (int k = 0; k < spec.num_patterns(); ++k) {
            const double s = severities(i, k);
            for (int j : spec.patterns[static_cast<std::size_t>(k)]) {
                const double factor = spec.noise > 0.0 ? rng.normal(1.0, spec.noise) : 1.0;
                double updated = v(i, j) - v(i, j) * s * factor * spec.atrophy;
                if (updated <= 0.0) {
                    updated = 1e-6;
                    ++clamp_count;
                }
                v(i, j) = updated;
            }
        }
    }
    if (clamped != nullptr) *clamped += clamp_count;
    return v;
}

SyntheticCohort make_cohort(Variant variant, int n_cn, int n_pt, int num_features, std::uint64_t seed)
{
    if (n_cn < 1 || n_pt < 1) {
        throw ArgumentError("make_cohort: group sizes must be positive");
    }
    Rng rng(seed);
    SyntheticCohort cohort;
    cohort.seed = seed;
    cohort.spec = build_pattern_spec(variant, num_features, rng);
    const Matrix baseline = generate_baseline(n_cn + n_pt, num_features, rng);
    cohort.cn = baseline.topRows(n_cn);
    cohort.truth.resize(n_pt, kSyntheticPatterns);
    for (Eigen::Index i = 0; i < n_pt; ++i)
        for (Eigen::Index k = 0; k < kSyntheticPatterns; ++k) cohort.truth(i, k) = rng.uniform();
    cohort.pt = impose_patterns(baseline.bottomRows(n_pt), cohort.spec, cohort.truth, rng, &cohort.clamped);
    return cohort;
}

}  // namespace surreal::synth
