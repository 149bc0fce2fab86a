#pragma once

#include "surreal/types.hpp"

#include <string>
#include <vector>

// Covariate residualization and CN-referenced standardization. Both are fit
// on CN rows only and applied to every row; fitted stats are persisted so the
// same transform can be replayed at inference time.
namespace surreal::synth {

struct Residualizer {
    std::vector<std::string> covariate_names;
    Matrix slopes;  // n_cov x S, intercept excluded

    bool empty() const { return slopes.size() == 0; }
    // features - covariates * slopes
    Matrix apply(const Matrix& features, const Matrix& covariates) const;
};

// OLS with intercept per feature on CN rows. Throws ArgumentError naming the
// collinear columns when the CN design matrix is rank deficient.
Residualizer fit_residualizer(const Matrix& features, const Matrix& covariates, const std::vector<bool>& cn_mask,
                              std::vector<std::string> covariate_names = {});

Matrix residualize(const Matrix& features, const Matrix& covariates, const std::vector<bool>& cn_mask);

struct Standardizer {
    RowVector mean;
    RowVector stddev;  // sample standard deviation (n - 1)

    Matrix apply(const Matrix& features) const;
};

// Throws ArgumentError naming the feature when a CN column has zero variance.
Standardizer fit_standardizer(const Matrix& features, const std::vector<bool>& cn_mask);

struct StandardizedFeatures {
    Matrix values;
    Standardizer stats;
};

StandardizedFeatures standardize(const Matrix& features, const std::vector<bool>& cn_mask);

// Everything needed to replay preprocessing on new rows.
struct ReferenceStats {
    Residualizer residualizer;
    Standardizer standardizer;

    Matrix apply(const Matrix& raw_features, const Matrix& covariates) const;
};

std::string reference_stats_to_string(const ReferenceStats& stats);
ReferenceStats reference_stats_from_string(const std::string& text);

}  // namespace surreal::synth
