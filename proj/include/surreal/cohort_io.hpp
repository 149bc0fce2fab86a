#pragma once

#include "surreal/synthdata.hpp"
#include "surreal/types.hpp"

#include <stdexcept>
#include <string>
#include <vector>

// Cohort CSV files. Header: subject_id, group, then covariate columns
// (named "cov_<name>") and feature columns. Group is CN or PT. Values are
// written with 12 significant digits.
namespace surreal::io {

class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A file could not be opened or written, as opposed to malformed content.
class IoError : public DataError {
public:
    using DataError::DataError;
};

struct CohortTable {
    std::vector<std::string> subject_ids;
    std::vector<bool> is_cn;
    std::vector<std::string> covariate_names;  // without the "cov_" prefix
    Matrix covariates;                         // n x n_cov (may have zero columns)
    std::vector<std::string> feature_names;
    Matrix features;                           // n x S

    Eigen::Index rows() const { return features.rows(); }
    Matrix cn_rows() const;
    Matrix pt_rows() const;
    std::vector<std::string> pt_ids() const;
};

struct TruthTable {
    std::vector<std::string> subject_ids;
    Matrix severities;  // n x M
};

std::string format_value(double v);

void write_cohort_csv(const std::string& path, const CohortTable& table);
CohortTable read_cohort_csv(const std::string& path);

void write_truth_csv(const std::string& path, const TruthTable& truth);
TruthTable read_truth_csv(const std::string& path);

// Rows of `truth` reordered to follow `ids`; throws DataError on a missing id.
Matrix align_truth(const TruthTable& truth, const std::vector<std::string>& ids);

// CN rows get ids cn_0001..., PT rows pt_0001...; features are named roi_<j>.
CohortTable cohort_table(const synth::SyntheticCohort& cohort);
TruthTable truth_table(const synth::SyntheticCohort& cohort);

// Writes a plain header + rows CSV of a matrix with row ids.
void write_matrix_csv(const std::string& path, const std::vector<std::string>& header,
                      const std::vector<std::string>& ids, const Matrix& values,
                      const std::vector<std::string>& trailing = {});

}  // namespace surreal::io
