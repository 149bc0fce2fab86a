#include "surreal/preprocess.hpp"

#include "json.hpp"

#include <cmath>

namespace surreal::synth {

namespace {

std::vector<Eigen::Index> masked_rows(const std::vector<bool>& mask, Eigen::Index rows)
{
    if (static_cast<Eigen::Index>(mask.size()) != rows) {
        throw ShapeError("CN mask has " + std::to_string(mask.size()) + " entries for " + std::to_string(rows) +
                         " rows");
    }
    std::vector<Eigen::Index> out;
    for (Eigen::Index i = 0; i < rows; ++i) {
        if (mask[static_cast<std::size_t>(i)]) out.push_back(i);
    }
    return out;
}

std::string column_label(const std::vector<std::string>& names, Eigen::Index idx)
{
    if (idx < static_cast<Eigen::Index>(names.size())) return names[static_cast<std::size_t>(idx)];
    return "covariate " + std::to_string(idx);
}

}  // namespace

Matrix Residualizer::apply(const Matrix& features, const Matrix& covariates) const
{
    if (empty()) return features;
    require_shape(covariates, features.rows(), slopes.rows(), "residualizer covariates");
    require_cols(features, slopes.cols(), "residualizer features");
    return features - covariates * slopes;
}

Residualizer fit_residualizer(const Matrix& features, const Matrix& covariates, const std::vector<bool>& cn_mask,
                              std::vector<std::string> covariate_names)
{
    Residualizer model;
    model.covariate_names = std::move(covariate_names);
    if (covariates.cols() == 0) {
        return model;
    }
    require_shape(covariates, features.rows(), covariates.cols(), "residualize covariates");
    const auto rows = masked_rows(cn_mask, features.rows());
    const Eigen::Index p = covariates.cols();
    const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
    if (n <= p) {
        throw ArgumentError("residualize: need more CN rows than covariates (" + std::to_string(n) + " <= " +
                            std::to_string(p) + ")");
    }

    Matrix design(n, p + 1);
    Matrix target(n, features.cols());
    for (Eigen::Index i = 0; i < n; ++i) {
        design(i, 0) = 1.0;
        design.row(i).tail(p) = covariates.row(rows[static_cast<std::size_t>(i)]);
        target.row(i) = features.row(rows[static_cast<std::size_t>(i)]);
    }

    Eigen::ColPivHouseholderQR<Matrix> qr(design);
    if (qr.rank() < p + 1) {
        std::string names;
        const auto& perm = qr.colsPermutation().indices();
        for (Eigen::Index k = qr.rank(); k < p + 1; ++k) {
            const Eigen::Index col = perm(k);
            if (!names.empty()) names += ", ";
            names += col == 0 ? std::string("intercept") : column_label(model.covariate_names, col - 1);
        }
        throw ArgumentError("residualize: covariates are collinear on CN rows (" + names + ")");
    }
    const Matrix coef = qr.solve(target);
    model.slopes = coef.bottomRows(p);
    return model;
}

Matrix residualize(const Matrix& features, const Matrix& covariates, const std::vector<bool>& cn_mask)
{
    return fit_residualizer(features, covariates, cn_mask).apply(features, covariates);
}

Matrix Standardizer::apply(const Matrix& features) const
{
    require_cols(features, mean.size(), "standardize features");
    return (features.rowwise() - mean).array().rowwise() / stddev.array();
}

Standardizer fit_standardizer(const Matrix& features, const std::vector<bool>& cn_mask)
{
    const auto rows = masked_rows(cn_mask, features.rows());
    if (rows.size() < 2) {
        throw ArgumentError("standardize: need at least two CN rows");
    }
    Matrix cn(static_cast<Eigen::Index>(rows.size()), features.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) cn.row(static_cast<Eigen::Index>(i)) = features.row(rows[i]);

    Standardizer stats;
    stats.mean = cn.colwise().mean();
    const Matrix centered = cn.rowwise() - stats.mean;
    stats.stddev = (centered.colwise().squaredNorm() / static_cast<double>(cn.rows() - 1)).cwiseSqrt();
    for (Eigen::Index j = 0; j < stats.stddev.size(); ++j) {
        if (!(stats.stddev(j) > 0.0)) {
            throw ArgumentError("standardize: feature " + std::to_string(j) + " has zero variance in the CN group");
        }
    }
    return stats;
}

StandardizedFeatures standardize(const Matrix& features, const std::vector<bool>& cn_mask)
{
    StandardizedFeatures out;
    out.stats = fit_standardizer(features, cn_mask);
    out.values = out.stats.apply(features);
    return out;
}

Matrix ReferenceStats::apply(const Matrix& raw_features, const Matrix& covariates) const
{
    return standardizer.apply(residualizer.apply(raw_features, covariates));
}

namespace {

using Json = nlohmann::json;

std::vector<double> to_vec(const RowVector& v) { return {v.data(), v.data() + v.size()}; }

RowVector from_vec(const std::vector<double>& v)
{
    return Eigen::Map<const RowVector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

std::string reference_stats_to_string(const ReferenceStats& stats)
{
    Json slopes = Json::array();
    for (Eigen::Index r = 0; r < stats.residualizer.slopes.rows(); ++r) {
        slopes.push_back(to_vec(stats.residualizer.slopes.row(r)));
    }
    const Json j{{"format", "surreal-gan-reference-stats"},
                 {"version", 1},
                 {"covariates", stats.residualizer.covariate_names},
                 {"slopes", slopes},
                 {"mean", to_vec(stats.standardizer.mean)},
                 {"stddev", to_vec(stats.standardizer.stddev)}};
    return j.dump(1) + "\n";
}

ReferenceStats reference_stats_from_string(const std::string& text)
{
    ReferenceStats stats;
    try {
        const Json j = Json::parse(text);
        if (j.at("format") != "surreal-gan-reference-stats" || j.at("version") != 1) {
            throw ArgumentError("unsupported reference stats document");
        }
        stats.residualizer.covariate_names = j.at("covariates").get<std::vector<std::string>>();
        stats.standardizer.mean = from_vec(j.at("mean").get<std::vector<double>>());
        stats.standardizer.stddev = from_vec(j.at("stddev").get<std::vector<double>>());
        const Json& slopes = j.at("slopes");
        if (!slopes.empty()) {
            stats.residualizer.slopes.resize(static_cast<Eigen::Index>(slopes.size()), stats.standardizer.mean.size());
            for (std::size_t r = 0; r < slopes.size(); ++r) {
                const RowVector row = from_vec(slopes[r].get<std::vector<double>>());
                require_cols(row, stats.standardizer.mean.size(), "reference stats slope row");
                stats.residualizer.slopes.row(static_cast<Eigen::Index>(r)) = row;
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ArgumentError(std::string("malformed reference stats: ") + e.what());
    }
    if (stats.standardizer.mean.size() != stats.standardizer.stddev.size()) {
        throw ArgumentError("reference stats: mean and stddev lengths differ");
    }
    return stats;
}

}  // namespace surreal::synth
