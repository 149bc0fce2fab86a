#include "doctest.h"
#include "oracles.hpp"

#include "surreal/metrics.hpp"

#include <algorithm>
#include <cmath>

using namespace surreal;
using namespace surreal::metrics;

namespace {

Vector vec(std::initializer_list<double> values)
{
    Vector v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double x : values) v(i++) = x;
    return v;
}

// Random vector with deliberate ties: values drawn from a small grid.
Vector tied_vector(Eigen::Index n, int levels, Rng& rng)
{
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = static_cast<double>(rng.below(static_cast<std::uint64_t>(levels)));
    return v;
}

}  // namespace

TEST_SUITE("metrics")
{
    TEST_CASE("c-index hand values")
    {
        CHECK(c_index(vec({1, 2, 3}), vec({1, 2, 3})) == 1.0);
        CHECK(c_index(vec({3, 2, 1}), vec({1, 2, 3})) == 0.0);
        CHECK(std::fabs(c_index(vec({0.2, 0.1, 0.3, 0.4}), vec({1, 2, 3, 4})) - 5.0 / 6.0) < 1e-15);
        CHECK(c_index(vec({1, 1, 1}), vec({1, 2, 3})) == 0.5);
        CHECK_THROWS_AS(c_index(vec({1, 2}), vec({4, 4})), UndefinedMetric);
        CHECK_THROWS_AS(c_index(vec({1}), vec({1})), std::exception);
        CHECK_THROWS_AS(c_index(vec({1, 2}), vec({1, 2, 3})), std::exception);
    }

    TEST_CASE("c-index agrees with pair enumeration including ties")
    {
        Rng rng(17);
        for (int trial = 0; trial < 200; ++trial) {
            const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.below(199));
            const bool ties = trial % 2 == 0;
            const Vector pred = ties ? tied_vector(n, 5, rng) : Vector(oracle::random_matrix(n, 1, rng).col(0));
            Vector truth = ties ? tied_vector(n, 4, rng) : Vector(oracle::random_matrix(n, 1, rng).col(0));
            if (truth.maxCoeff() == truth.minCoeff()) truth(0) += 1.0;
            const double expected = oracle::concordance(oracle::to_std(pred), oracle::to_std(truth));
            CHECK(c_index(pred, truth) == doctest::Approx(expected).epsilon(1e-15));
            CHECK(c_index_bruteforce(pred, truth) == doctest::Approx(expected).epsilon(1e-15));
        }
    }

    TEST_CASE("c-index is invariant under increasing transforms")
    {
        Rng rng(2);
        const Vector p = oracle::random_unit(300, 1, rng).col(0);
        const Vector t = oracle::random_matrix(300, 1, rng).col(0);
        const Vector cubed = p.array().cube().matrix();
        CHECK(c_index(cubed, t) == c_index(p, t));
    }

    TEST_CASE("pattern c-index aligns columns")
    {
        Rng rng(3);
        const Matrix truth = oracle::random_unit(50, 3, rng);
        const AlignmentResult same = pattern_c_index(truth, truth);
        CHECK(same.mean == 1.0);
        CHECK(same.permutation == std::vector<int>{0, 1, 2});

        Matrix swapped = truth;
        swapped.col(0) = truth.col(1);
        swapped.col(1) = truth.col(0);
        const AlignmentResult s = pattern_c_index(swapped, truth);
        CHECK(s.mean == 1.0);
        CHECK(s.permutation == std::vector<int>{1, 0, 2});
        CHECK(apply_permutation(swapped, s.permutation) == truth);

        const Matrix noise = oracle::random_unit(900, 3, rng);
        CHECK(std::fabs(pattern_c_index(noise, oracle::random_unit(900, 3, rng)).mean - 0.5) < 0.02 + 0.02);
    }

    TEST_CASE("random noise scores near one half on average")
    {
        Rng rng(4);
        double total = 0.0;
        for (int i = 0; i < 20; ++i) {
            const Matrix truth = oracle::random_unit(900, 3, rng);
            // Independent per-dimension c-index, without the max over permutations.
            total += c_index(oracle::random_unit(900, 1, rng).col(0), truth.col(0));
        }
        CHECK(std::fabs(total / 20.0 - 0.5) < 0.02);
    }

    TEST_CASE("pattern c-index is exactly invariant to a shared column permutation")
    {
        Rng rng(5);
        for (int trial = 0; trial < 50; ++trial) {
            const Matrix r = oracle::random_unit(40, 4, rng);
            const Matrix t = oracle::random_unit(40, 4, rng);
            std::vector<int> perm{0, 1, 2, 3};
            std::shuffle(perm.begin(), perm.end(), rng.engine());
            CHECK(pattern_c_index(apply_permutation(r, perm), apply_permutation(t, perm)).mean ==
                  pattern_c_index(r, t).mean);
        }
    }

    TEST_CASE("agreement index")
    {
        Rng rng(6);
        const Matrix a = oracle::random_unit(60, 3, rng);
        CHECK(pattern_agr_index(a, a).mean == 1.0);
        CHECK(pattern_agr_index(a, a.array().cube().matrix()).mean == 1.0);
        const Matrix b = oracle::random_unit(60, 3, rng);
        CHECK(pattern_agr_index(a, b).mean == pattern_agr_index(b, a).mean);
    }

    TEST_CASE("agreement table")
    {
        Rng rng(7);
        const Matrix a = oracle::random_unit(80, 2, rng);
        const AgreementTable same = agreement_table({a, a, a});
        CHECK(same.mean_pairwise == 1.0);
        CHECK((same.pairwise.array() == 1.0).all());

        const AgreementTable mixed = agreement_table({a, a, oracle::random_unit(80, 2, rng)});
        CHECK(mixed.pairwise == mixed.pairwise.transpose());
        CHECK(mixed.per_replica[2] < mixed.per_replica[0]);
        CHECK(mixed.per_replica[2] < mixed.per_replica[1]);
        CHECK_THROWS_AS(agreement_table({a}), ArgumentError);
    }

    TEST_CASE("hyperparameter selection")
    {
        Rng rng(8);
        const Matrix a = oracle::random_unit(80, 2, rng);
        const std::vector<GridCell> one{GridCell{2, 0.2, {a, oracle::random_unit(80, 2, rng)}}};
        CHECK(select_hyper(one).cell == 0);

        std::vector<GridCell> grid{GridCell{2, 0.1, {oracle::random_unit(80, 2, rng), oracle::random_unit(80, 2, rng)}},
                                   GridCell{2, 0.4, {a, a, oracle::random_unit(80, 2, rng)}},
                                   GridCell{3, 0.2, {oracle::random_unit(80, 3, rng), oracle::random_unit(80, 3, rng)}}};
        grid[1].replica_indices[2] = a;
        const Selection s = select_hyper(grid);
        CHECK(s.cell == 1);
        CHECK(s.lambda == 0.4);
        CHECK(s.replica == 0);
        CHECK(s.tables.size() == 3);

        const std::vector<GridCell> tie{GridCell{3, 0.4, {a, a}}, GridCell{2, 0.4, {a, a}}, GridCell{2, 0.2, {a, a}}};
        CHECK(select_hyper(tie).cell == 2);
        CHECK_THROWS_AS(select_hyper({}), ArgumentError);
    }

    TEST_CASE("subgrouping thresholds")
    {
        Matrix r(4, 2);
        r << 0.8, 0.1, 0.5, 0.5, 0.1, 0.1, 0.2, 0.55;
        const auto g = subgroup_by_r(r);
        CHECK(g[0].to_string() == "p1-high");
        CHECK(g[1].to_string() == "mixed");
        CHECK(g[2].to_string() == "mixed-low");
        CHECK(g[3].to_string() == "p2-mid");
        CHECK_THROWS_AS(subgroup_by_r(r, 0.7, 0.4), ArgumentError);
    }

    TEST_CASE("lemma 1 slack")
    {
        const ModelBundle b = init_bundle(3, 12, 5);
        Rng rng(9);
        const RowVector x = oracle::random_matrix(1, 12, rng).row(0);
        const RowVector z = oracle::random_unit(1, 3, rng).row(0);
        CHECK(lemma1_slack(b, x, z, z, 1.0) >= 0.0);
        CHECK_THROWS_AS(lemma1_slack(b, x, z, z, 0.0), ArgumentError);

        const SlackSummary s = lemma1_diagnostic(b, oracle::random_matrix(50, 12, rng), 200, 3);
        CHECK(s.samples == 200);
        CHECK(s.k2 > 0.0);
        CHECK(s.min_slack >= -1e-9);
        CHECK(s.violations == 0);
    }

    TEST_CASE("monotonicity diagnostic")
    {
        ModelBundle b = init_bundle(2, 8, 4);
        Rng rng(11);
        const Matrix cn = oracle::random_matrix(40, 8, rng);
        const MonotonicitySummary a = monotonicity_diagnostic(b, cn, 300, 5);
        CHECK(a.samples == 300);
        CHECK(a.mean_loss >= 0.0);
        CHECK(a.violation_fraction >= 0.0);
        CHECK(a.violation_fraction <= 1.0);
        CHECK(monotonicity_diagnostic(b, cn, 300, 5).mean_loss == a.mean_loss);

        // A transformation that ignores z imposes no change at all.
        b.f[flayer::kDec2].weights.setZero();
        if (b.f[flayer::kDec2].has_bias) b.f[flayer::kDec2].bias.setZero();
        const MonotonicitySummary none = monotonicity_diagnostic(b, cn, 300, 5);
        CHECK(none.mean_loss == 0.0);
        CHECK(none.violation_fraction == 0.0);
        CHECK_THROWS_AS(monotonicity_diagnostic(b, cn, 0, 5), ArgumentError);
    }

    TEST_CASE("lipschitz estimate bounds the sampled ratios")
    {
        const ModelBundle b = init_bundle(2, 8, 1);
        Rng rng(10);
        const Matrix ya = oracle::random_matrix(30, 8, rng);
        const Matrix yb = oracle::random_matrix(30, 8, rng);
        const double k = estimate_lipschitz(b, ya, yb);
        const Matrix ga = reconstruct_indices(b, ya);
        const Matrix gb = reconstruct_indices(b, yb);
        for (Eigen::Index i = 0; i < 30; ++i) {
            CHECK((ga.row(i) - gb.row(i)).norm() <= k * (ya.row(i) - yb.row(i)).norm() * (1 + 1e-12));
        }
    }
}
