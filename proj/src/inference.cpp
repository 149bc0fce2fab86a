#include "surreal/inference.hpp"

#include "surreal/cohort_io.hpp"

namespace surreal::inference {

RIndexMatrix infer(const Checkpoint& checkpoint, const Matrix& features, std::vector<std::string> subject_ids,
                   std::string source)
{
    const ModelBundle& bundle = checkpoint.bundle;
    if (features.cols() != bundle.num_features) {
        throw ShapeError("infer: feature width " + std::to_string(features.cols()) + " != checkpoint S " +
                         std::to_string(bundle.num_features));
    }
    if (!subject_ids.empty() && static_cast<Eigen::Index>(subject_ids.size()) != features.rows()) {
        throw ShapeError("infer: subject id count does not match row count");
    }
    RIndexMatrix out;
    out.values = reconstruct_indices(bundle, features);
    out.subject_ids = std::move(subject_ids);
    if (out.subject_ids.empty()) {
        for (Eigen::Index i = 0; i < features.rows(); ++i) out.subject_ids.push_back(std::to_string(i + 1));
    }
    out.source = std::move(source);
    return out;
}

RIndexMatrix infer_raw(const Checkpoint& checkpoint, const Matrix& raw_features, const Matrix& covariates,
                       const synth::ReferenceStats* stats, std::vector<std::string> subject_ids, std::string source)
{
    if (stats == nullptr) {
        throw ArgumentError("infer: raw features need the persisted reference stats");
    }
    return infer(checkpoint, stats->apply(raw_features, covariates), std::move(subject_ids), std::move(source));
}

RIndexMatrix align_to(const RIndexMatrix& r, const Matrix& reference)
{
    const auto alignment = metrics::pattern_c_index(r.values, reference);
    RIndexMatrix out = r;
    out.values = metrics::apply_permutation(r.values, alignment.permutation);
    std::vector<int> composed = alignment.permutation;
    if (r.permutation) {
        for (auto& p : composed) p = (*r.permutation)[static_cast<std::size_t>(p)];
    }
    out.permutation = composed;
    return out;
}

void write_rindex_csv(const std::string& path, const RIndexMatrix& r)
{
    std::vector<std::string> header{"subject_id"};
    for (Eigen::Index k = 0; k < r.values.cols(); ++k) header.push_back("r_" + std::to_string(k + 1));
    header.push_back("group");
    std::vector<std::string> groups;
    for (const auto& label : metrics::subgroup_by_r(r.values)) groups.push_back(label.to_string());
    io::write_matrix_csv(path, header, r.subject_ids, r.values, groups);
}

}  // namespace surreal::inference
