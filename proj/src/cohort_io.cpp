#include "surreal/cohort_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace surreal::io {

namespace {

std::vector<std::string> split_line(const std::string& line)
{
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::ifstream open_in(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    return in;
}

std::ofstream open_out(const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    return out;
}

double parse_number(const std::string& text, const std::string& path, std::size_t line)
{
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw DataError(path + ":" + std::to_string(line) + ": not a number: '" + text + "'");
    }
}

std::string strip_cr(std::string line)
{
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

Matrix select_rows(const CohortTable& t, bool cn)
{
    std::vector<Eigen::Index> rows;
    for (Eigen::Index i = 0; i < t.rows(); ++i)
        if (t.is_cn[static_cast<std::size_t>(i)] == cn) rows.push_back(i);
    Matrix out(static_cast<Eigen::Index>(rows.size()), t.features.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = t.features.row(rows[i]);
    return out;
}

}  // namespace

Matrix CohortTable::cn_rows() const { return select_rows(*this, true); }
Matrix CohortTable::pt_rows() const { return select_rows(*this, false); }

std::vector<std::string> CohortTable::pt_ids() const
{
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < subject_ids.size(); ++i)
        if (!is_cn[i]) ids.push_back(subject_ids[i]);
    return ids;
}

std::string format_value(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

void write_cohort_csv(const std::string& path, const CohortTable& t)
{
    std::ofstream out = open_out(path);
    out << "subject_id,group";
    for (const auto& c : t.covariate_names) out << ",cov_" << c;
    for (const auto& f : t.feature_names) out << ',' << f;
    out << '\n';
    for (Eigen::Index i = 0; i < t.rows(); ++i) {
        out << t.subject_ids[static_cast<std::size_t>(i)] << ',' << (t.is_cn[static_cast<std::size_t>(i)] ? "CN" : "PT");
        for (Eigen::Index c = 0; c < t.covariates.cols(); ++c) out << ',' << format_value(t.covariates(i, c));
        for (Eigen::Index j = 0; j < t.features.cols(); ++j) out << ',' << format_value(t.features(i, j));
        out << '\n';
    }
    if (!out) throw IoError("write failed for '" + path + "'");
}

CohortTable read_cohort_csv(const std::string& path)
{
    std::ifstream in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": empty file");
    const auto header = split_line(strip_cr(line));
    if (header.size() < 3 || header[0] != "subject_id" || header[1] != "group") {
        throw DataError(path + ": header must start with subject_id,group");
    }
    CohortTable t;
    std::vector<std::size_t> cov_cols;
    std::vector<std::size_t> feat_cols;
    for (std::size_t c = 2; c < header.size(); ++c) {
        if (header[c].rfind("cov_", 0) == 0) {
            cov_cols.push_back(c);
            t.covariate_names.push_back(header[c].substr(4));
        } else {
            feat_cols.push_back(c);
            t.feature_names.push_back(header[c]);
        }
    }
    if (feat_cols.empty()) throw DataError(path + ": no feature columns");

    std::vector<std::vector<double>> covs;
    std::vector<std::vector<double>> feats;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty()) continue;
        const auto fields = split_line(line);
        if (fields.size() != header.size()) {
            throw DataError(path + ":" + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                            " fields, got " + std::to_string(fields.size()));
        }
        t.subject_ids.push_back(fields[0]);
        if (fields[1] == "CN") {
            t.is_cn.push_back(true);
        } else if (fields[1] == "PT") {
            t.is_cn.push_back(false);
        } else {
            throw DataError(path + ":" + std::to_string(line_no) + ": group must be CN or PT");
        }
        std::vector<double> cv;
        for (auto c : cov_cols) cv.push_back(parse_number(fields[c], path, line_no));
        std::vector<double> fv;
        for (auto c : feat_cols) fv.push_back(parse_number(fields[c], path, line_no));
        covs.push_back(std::move(cv));
        feats.push_back(std::move(fv));
    }
    const auto n = static_cast<Eigen::Index>(feats.size());
    t.covariates.resize(n, static_cast<Eigen::Index>(cov_cols.size()));
    t.features.resize(n, static_cast<Eigen::Index>(feat_cols.size()));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index c = 0; c < t.covariates.cols(); ++c) t.covariates(i, c) = covs[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)];
        for (Eigen::Index j = 0; j < t.features.cols(); ++j) t.features(i, j) = feats[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    return t;
}

void write_matrix_csv(const std::string& path, const std::vector<std::string>& header,
                      const std::vector<std::string>& ids, const Matrix& values,
                      const std::vector<std::string>& trailing)
{
    std::ofstream out = open_out(path);
    for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
    out << '\n';
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        out << ids[static_cast<std::size_t>(i)];
        for (Eigen::Index c = 0; c < values.cols(); ++c) out << ',' << format_value(values(i, c));
        if (!trailing.empty()) out << ',' << trailing[static_cast<std::size_t>(i)];
        out << '\n';
    }
    if (!out) throw IoError("write failed for '" + path + "'");
}

void write_truth_csv(const std::string& path, const TruthTable& truth)
{
    std::vector<std::string> header{"subject_id"};
    for (Eigen::Index k = 0; k < truth.severities.cols(); ++k) header.push_back("s_" + std::to_string(k + 1));
    write_matrix_csv(path, header, truth.subject_ids, truth.severities);
}

TruthTable read_truth_csv(const std::string& path)
{
    std::ifstream in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": empty file");
    const auto header = split_line(strip_cr(line));
    if (header.size() < 2 || header[0] != "subject_id") throw DataError(path + ": header must start with subject_id");
    TruthTable t;
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty()) continue;
        const auto fields = split_line(line);
        if (fields.size() != header.size()) throw DataError(path + ":" + std::to_string(line_no) + ": wrong field count");
        t.subject_ids.push_back(fields[0]);
        std::vector<double> v;
        for (std::size_t c = 1; c < fields.size(); ++c) v.push_back(parse_number(fields[c], path, line_no));
        rows.push_back(std::move(v));
    }
    t.severities.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(header.size() - 1));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t c = 0; c < rows[i].size(); ++c) t.severities(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
    return t;
}

Matrix align_truth(const TruthTable& truth, const std::vector<std::string>& ids)
{
    std::unordered_map<std::string, Eigen::Index> index;
    for (std::size_t i = 0; i < truth.subject_ids.size(); ++i) index[truth.subject_ids[i]] = static_cast<Eigen::Index>(i);
    Matrix out(static_cast<Eigen::Index>(ids.size()), truth.severities.cols());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const auto it = index.find(ids[i]);
        if (it == index.end()) throw DataError("no truth row for subject '" + ids[i] + "'");
        out.row(static_cast<Eigen::Index>(i)) = truth.severities.row(it->second);
    }
    return out;
}

namespace {

std::string make_id(const char* prefix, Eigen::Index i)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s_%04ld", prefix, static_cast<long>(i + 1));
    return buf;
}

}  // namespace

CohortTable cohort_table(const synth::SyntheticCohort& cohort)
{
    CohortTable t;
    const Eigen::Index n_cn = cohort.cn.rows();
    const Eigen::Index n_pt = cohort.pt.rows();
    t.features.resize(n_cn + n_pt, cohort.cn.cols());
    t.features.topRows(n_cn) = cohort.cn;
    t.features.bottomRows(n_pt) = cohort.pt;
    t.covariates.resize(n_cn + n_pt, 0);
    for (Eigen::Index i = 0; i < n_cn; ++i) {
        t.subject_ids.push_back(make_id("cn", i));
        t.is_cn.push_back(true);
    }
    for (Eigen::Index i = 0; i < n_pt; ++i) {
        t.subject_ids.push_back(make_id("pt", i));
        t.is_cn.push_back(false);
    }
    for (Eigen::Index j = 0; j < cohort.cn.cols(); ++j) t.feature_names.push_back("roi_" + std::to_string(j + 1));
    return t;
}

TruthTable truth_table(const synth::SyntheticCohort& cohort)
{
    TruthTable t;
    for (Eigen::Index i = 0; i < cohort.pt.rows(); ++i) t.subject_ids.push_back(make_id("pt", i));
    t.severities = cohort.truth;
    return t;
}

}  // namespace surreal::io
