#pragma once

#include "surreal/metrics.hpp"
#include "surreal/preprocess.hpp"
#include "surreal/training.hpp"

#include <optional>
#include <string>
#include <vector>

namespace surreal::inference {

struct RIndexMatrix {
    Matrix values;  // n x M, entries in (0, 1)
    std::vector<std::string> subject_ids;
    std::optional<std::vector<int>> permutation;
    std::string source;  // checkpoint identifier
};

// Rows are used as given: they must already be preprocessed.
RIndexMatrix infer(const Checkpoint& checkpoint, const Matrix& features, std::vector<std::string> subject_ids = {},
                   std::string source = {});

// Raw rows are residualized and standardized with the persisted reference
// stats first; stats are never refit on inference data.
RIndexMatrix infer_raw(const Checkpoint& checkpoint, const Matrix& raw_features, const Matrix& covariates,
                       const synth::ReferenceStats* stats, std::vector<std::string> subject_ids = {},
                       std::string source = {});

// Permutes r's columns to best match the reference (another model's indices
// or planted severities).
RIndexMatrix align_to(const RIndexMatrix& r, const Matrix& reference);

// subject_id, r_1..r_M, group
void write_rindex_csv(const std::string& path, const RIndexMatrix& r);

}  // namespace surreal::inference
