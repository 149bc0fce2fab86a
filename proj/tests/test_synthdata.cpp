#include "doctest.h"
#include "oracles.hpp"

#include "surreal/cohort_io.hpp"
#include "surreal/preprocess.hpp"
#include "surreal/synthdata.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

using namespace surreal;
using namespace surreal::synth;

namespace {

int overlap(const std::vector<int>& a, const std::vector<int>& b)
{
    std::vector<int> common;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
    return static_cast<int>(common.size());
}

std::vector<bool> first_rows(Eigen::Index n, Eigen::Index k)
{
    std::vector<bool> mask(static_cast<std::size_t>(n), false);
    for (Eigen::Index i = 0; i < k; ++i) mask[static_cast<std::size_t>(i)] = true;
    return mask;
}

std::string temp_path(const std::string& name)
{
    return (std::filesystem::temp_directory_path() / ("surreal_test_" + name)).string();
}

}  // namespace

TEST_SUITE("synthdata")
{
    TEST_CASE("baseline volumes are positive log-normal with the stated spread")
    {
        Rng rng(3);
        const Matrix v = generate_baseline(10000, 5, rng);
        CHECK(v.minCoeff() > 0.0);
        for (Eigen::Index j = 0; j < 5; ++j) {
            const double mean = v.col(j).mean();
            const double sd = std::sqrt((v.col(j).array() - mean).square().sum() / 9999.0);
            CHECK(std::fabs(sd / mean - 0.12) < 0.02);
        }
        Rng again(3);
        CHECK(generate_baseline(10000, 5, again) == v);
    }

    TEST_CASE("pattern specs per variant")
    {
        Rng rng(5);
        const PatternSpec basic = build_pattern_spec(Variant::Basic, 139, rng);
        REQUIRE(basic.num_patterns() == 3);
        for (int i = 0; i < 3; ++i) {
            CHECK(basic.patterns[static_cast<std::size_t>(i)].size() == 14);
            CHECK(basic.patterns[static_cast<std::size_t>(i)].back() < 139);
            for (int j = i + 1; j < 3; ++j) {
                CHECK(overlap(basic.patterns[static_cast<std::size_t>(i)], basic.patterns[static_cast<std::size_t>(j)]) ==
                      4);
            }
        }
        CHECK(basic.atrophy == 0.3);
        CHECK(basic.noise == 0.05);

        Rng r2(5);
        const PatternSpec mild = build_pattern_spec(Variant::Mild, 139, r2);
        CHECK(mild.atrophy == 0.2);
        CHECK(mild.noise == basic.noise);
        CHECK(mild.pattern_size == basic.pattern_size);
        CHECK(mild.overlap == basic.overlap);

        const PatternSpec scarce = build_pattern_spec(Variant::Scarce, 139, rng);
        for (const auto& p : scarce.patterns) CHECK(p.size() == 4);
        CHECK(overlap(scarce.patterns[0], scarce.patterns[1]) == 0);

        const PatternSpec large = build_pattern_spec(Variant::LargeOverlap, 139, rng);
        CHECK(overlap(large.patterns[0], large.patterns[1]) == 8);
        CHECK(overlap(large.patterns[1], large.patterns[2]) == 8);

        CHECK(build_pattern_spec(Variant::Noisy, 139, rng).noise == 0.2);
        CHECK_THROWS_AS(variant_from_name("severe"), ArgumentError);
        for (Variant v : {Variant::Basic, Variant::LargeOverlap, Variant::Scarce, Variant::Noisy, Variant::Mild}) {
            CHECK(variant_from_name(variant_name(v)) == v);
        }
    }

    TEST_CASE("imposing patterns")
    {
        Rng rng(7);
        PatternSpec spec = build_pattern_spec(Variant::Basic, 40, rng);
        const Matrix base = generate_baseline(4, 40, rng);

        CHECK(impose_patterns(base, spec, Matrix::Zero(4, 3), rng) == base);

        spec.noise = 0.0;
        Matrix sev = Matrix::Zero(4, 3);
        sev(0, 0) = 1.0;
        const Matrix out = impose_patterns(base, spec, sev, rng);
        std::set<int> region0(spec.patterns[0].begin(), spec.patterns[0].end());
        for (int j = 0; j < 40; ++j) {
            const double expected = region0.count(j) != 0 ? 0.7 * base(0, j) : base(0, j);
            CHECK(std::fabs(out(0, j) - expected) < 1e-12);
        }
        CHECK(out.bottomRows(3) == base.bottomRows(3));

        Matrix stronger = sev;
        stronger(0, 0) = 0.5;
        const Matrix weaker = impose_patterns(base, spec, stronger, rng);
        for (int j : spec.patterns[0]) CHECK(out(0, j) < weaker(0, j));
    }

    TEST_CASE("mean reduction matches alpha times mean severity")
    {
        Rng rng(11);
        const PatternSpec spec = build_pattern_spec(Variant::Basic, 60, rng);
        std::set<int> shared;
        for (int a = 0; a < 3; ++a)
            for (int b = a + 1; b < 3; ++b)
                for (int j : spec.patterns[static_cast<std::size_t>(a)])
                    if (std::count(spec.patterns[static_cast<std::size_t>(b)].begin(),
                                   spec.patterns[static_cast<std::size_t>(b)].end(), j) != 0)
                        shared.insert(j);
        int single = -1;
        for (int j : spec.patterns[0])
            if (shared.count(j) == 0) single = j;
        REQUIRE(single >= 0);

        const Matrix base = Matrix::Ones(10000, 60);
        const Matrix sev = oracle::random_unit(10000, 3, rng);
        const Matrix out = impose_patterns(base, spec, sev, rng);
        const double reduction = 1.0 - out.col(single).mean();
        CHECK(std::fabs(reduction - 0.15) < 0.01);
    }

    TEST_CASE("clamped volumes are counted")
    {
        Rng rng(2);
        PatternSpec spec = build_pattern_spec(Variant::Basic, 40, rng);
        spec.atrophy = 2.0;
        spec.noise = 0.0;
        long long clamped = 0;
        const Matrix out = impose_patterns(Matrix::Ones(2, 40), spec, Matrix::Ones(2, 3), rng, &clamped);
        CHECK(clamped > 0);
        CHECK(out.minCoeff() > 0.0);
    }

    TEST_CASE("cohorts have the published sizes and are reproducible")
    {
        const SyntheticCohort c = make_cohort(Variant::Basic, 492, 900, 139, 4);
        CHECK(c.cn.rows() == 492);
        CHECK(c.cn.cols() == 139);
        CHECK(c.pt.rows() == 900);
        CHECK(c.truth.rows() == 900);
        CHECK(c.truth.cols() == 3);
        CHECK(c.truth.minCoeff() >= 0.0);
        CHECK(c.truth.maxCoeff() <= 1.0);
        const SyntheticCohort d = make_cohort(Variant::Basic, 492, 900, 139, 4);
        CHECK(c.cn == d.cn);
        CHECK(c.pt == d.pt);
        CHECK(c.truth == d.truth);
        CHECK(make_cohort(Variant::Basic, 20, 20, 30, 5).cn != make_cohort(Variant::Basic, 20, 20, 30, 6).cn);
    }

    TEST_CASE("cohort CSV round trip at twelve significant digits")
    {
        const SyntheticCohort c = make_cohort(Variant::Noisy, 6, 9, 30, 1);
        const io::CohortTable table = io::cohort_table(c);
        const std::string path = temp_path("cohort.csv");
        const std::string truth_path = temp_path("truth.csv");
        io::write_cohort_csv(path, table);
        io::write_truth_csv(truth_path, io::truth_table(c));
        const io::CohortTable back = io::read_cohort_csv(path);
        CHECK(back.subject_ids == table.subject_ids);
        CHECK(back.is_cn == table.is_cn);
        CHECK(back.feature_names == table.feature_names);
        CHECK(((back.features - table.features).array().abs() / table.features.array().abs()).maxCoeff() < 1e-11);
        const Matrix truth = io::align_truth(io::read_truth_csv(truth_path), back.pt_ids());
        CHECK((truth - c.truth).cwiseAbs().maxCoeff() < 1e-11);
        CHECK(back.cn_rows().rows() == 6);
        CHECK(back.pt_rows().rows() == 9);

        io::TruthTable partial = io::truth_table(c);
        partial.subject_ids.pop_back();
        partial.severities.conservativeResize(8, 3);
        CHECK_THROWS_AS(io::align_truth(partial, back.pt_ids()), io::DataError);
        std::filesystem::remove(path);
        std::filesystem::remove(truth_path);
    }

    TEST_CASE("malformed cohort files are data errors")
    {
        const std::string path = temp_path("bad.csv");
        {
            std::ofstream out(path);
            out << "subject_id,group,roi_0\ns1,CN,1.0\ns2,XX,2.0\n";
        }
        CHECK_THROWS_AS(io::read_cohort_csv(path), io::DataError);
        {
            std::ofstream out(path);
            out << "subject_id,group,roi_0\ns1,CN,abc\n";
        }
        CHECK_THROWS_AS(io::read_cohort_csv(path), io::DataError);
        std::filesystem::remove(path);
    }
}

TEST_SUITE("preprocess")
{
    TEST_CASE("no covariates leaves features unchanged")
    {
        Rng rng(1);
        const Matrix f = oracle::random_matrix(10, 3, rng);
        CHECK(residualize(f, Matrix(10, 0), first_rows(10, 6)) == f);
    }

    TEST_CASE("exact linear covariate effect is removed on CN rows")
    {
        Rng rng(2);
        Matrix cov = oracle::random_matrix(30, 1, rng);
        Matrix f(30, 2);
        f.col(0) = 3.0 + 2.0 * cov.col(0).array();
        f.col(1) = oracle::random_matrix(30, 1, rng);
        const Matrix adj = residualize(f, cov, first_rows(30, 20));
        const double spread = adj.col(0).head(20).maxCoeff() - adj.col(0).head(20).minCoeff();
        CHECK(spread < 1e-12);
        CHECK(std::fabs(adj(0, 0) - 3.0) < 1e-12);
    }

    TEST_CASE("planted covariate effect is recovered")
    {
        Rng rng(3);
        const Eigen::Index n = 2000;
        Matrix cov = oracle::random_matrix(n, 2, rng);
        Matrix f = oracle::random_matrix(n, 1, rng);
        f.col(0) += 2.0 * cov.col(0);
        const Matrix adj = residualize(f, cov, first_rows(n, 1500));
        const auto a = oracle::to_std(adj.col(0).head(1500));
        const auto c = oracle::to_std(cov.col(0).head(1500));
        double ma = 0, mc = 0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            ma += a[i];
            mc += c[i];
        }
        ma /= static_cast<double>(a.size());
        mc /= static_cast<double>(a.size());
        double num = 0, da = 0, dc = 0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            num += (a[i] - ma) * (c[i] - mc);
            da += (a[i] - ma) * (a[i] - ma);
            dc += (c[i] - mc) * (c[i] - mc);
        }
        CHECK(std::fabs(num / std::sqrt(da * dc)) < 0.01);
    }

    TEST_CASE("collinear covariates are rejected")
    {
        Rng rng(4);
        Matrix cov(20, 2);
        cov.col(0) = oracle::random_matrix(20, 1, rng);
        cov.col(1) = 2.0 * cov.col(0);
        CHECK_THROWS_AS(fit_residualizer(oracle::random_matrix(20, 3, rng), cov, first_rows(20, 20), {"age", "icv"}),
                        ArgumentError);
    }

    TEST_CASE("standardization is CN referenced")
    {
        Rng rng(5);
        Matrix f = oracle::random_matrix(50, 4, rng, 3.0);
        f.array() += 10.0;
        const auto mask = first_rows(50, 30);
        const StandardizedFeatures s = standardize(f, mask);
        for (Eigen::Index j = 0; j < 4; ++j) {
            const auto cn = s.values.col(j).head(30);
            const double mean = cn.mean();
            const double sd = std::sqrt((cn.array() - mean).square().sum() / 29.0);
            CHECK(std::fabs(mean) < 1e-12);
            CHECK(std::fabs(sd - 1.0) < 1e-12);
        }
        CHECK(s.stats.apply(s.stats.mean).cwiseAbs().maxCoeff() < 1e-15);
        CHECK(s.stats.apply(f) == s.values);

        Matrix flat = f;
        flat.col(2).head(30).setConstant(1.0);
        CHECK_THROWS_AS(fit_standardizer(flat, mask), ArgumentError);
    }

    TEST_CASE("persisted reference stats replay exactly")
    {
        Rng rng(6);
        const Matrix cov = oracle::random_matrix(40, 1, rng);
        Matrix f = oracle::random_matrix(40, 3, rng);
        f.col(1) += 0.5 * cov.col(0);
        const auto mask = first_rows(40, 25);
        ReferenceStats stats;
        stats.residualizer = fit_residualizer(f, cov, mask, {"age"});
        const Matrix adj = stats.residualizer.apply(f, cov);
        stats.standardizer = fit_standardizer(adj, mask);
        const Matrix joint = stats.apply(f, cov);
        const ReferenceStats back = reference_stats_from_string(reference_stats_to_string(stats));
        CHECK(back.apply(f, cov) == joint);
        CHECK(back.residualizer.covariate_names == std::vector<std::string>{"age"});
    }
}
