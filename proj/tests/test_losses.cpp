#include "doctest.h"
#include "oracles.hpp"

#include "surreal/losses.hpp"

#include <cmath>

using namespace surreal;
using namespace surreal::loss;

namespace {

Matrix row(std::initializer_list<double> values)
{
    Matrix m(1, static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double v : values) m(0, i++) = v;
    return m;
}

}  // namespace

TEST_SUITE("losses")
{
    TEST_CASE("cross-entropy hand values")
    {
        const Matrix half = Matrix::Constant(4, 2, 0.5);
        const AdversarialLosses uninformed = adversarial_losses(half, half);
        CHECK(std::fabs(uninformed.loss_d - 2.0 * std::log(2.0)) < 1e-12);
        CHECK(std::fabs(uninformed.loss_f_gan - std::log(2.0)) < 1e-12);

        const AdversarialLosses hand = adversarial_losses(row({0.2, 0.8}), row({0.6, 0.4}));
        CHECK(std::fabs(hand.loss_d - (-std::log(0.8) - std::log(0.6))) < 1e-12);
        CHECK(std::fabs(hand.loss_f_gan - (-std::log(0.4))) < 1e-12);
        CHECK(hand.clamped == 0);

        const AdversarialLosses perfect = adversarial_losses(row({0.0, 1.0}), row({1.0, 0.0}));
        CHECK(perfect.loss_d < 1e-12);
        CHECK(perfect.clamped == 1);
        CHECK(std::fabs(perfect.loss_f_gan + std::log(kLogClamp)) < 1e-9);
    }

    TEST_CASE("change and cn are mean row L1")
    {
        const Matrix x = Matrix::Zero(1, 2);
        CHECK(std::fabs(change_loss(x, row({0.5, -0.5})) - 1.0) < 1e-12);
        CHECK(change_loss(x, x) == 0.0);
        CHECK(std::fabs(change_loss(x, row({1.0, -1.0})) - 2.0) < 1e-12);
        CHECK(std::fabs(cn_loss(Matrix::Zero(1, 3), row({0.1, -0.2, 0.0})) - 0.3) < 1e-12);

        Rng rng(4);
        const Matrix a = oracle::random_matrix(7, 5, rng);
        const Matrix b = oracle::random_matrix(7, 5, rng);
        CHECK(std::fabs(change_loss(a, b) - oracle::row_l1_mean(a, b)) < 1e-12);
        CHECK(change_loss(a, b) == cn_loss(a, b));
    }

    TEST_CASE("decomposition is mean row L2 and block-position sensitive")
    {
        const std::vector<Matrix> q{row({0.0, 0.0}), row({0.0, 0.0})};
        CHECK(std::fabs(decom_loss(row({3.0, 4.0, 0.0, 0.0}), q) - 5.0) < 1e-12);
        const std::vector<Matrix> exact{row({1.0, 2.0}), row({3.0, 4.0})};
        CHECK(decom_loss(row({1.0, 2.0, 3.0, 4.0}), exact) == 0.0);
        const std::vector<Matrix> swapped{exact[1], exact[0]};
        CHECK(decom_loss(row({1.0, 2.0, 3.0, 4.0}), swapped) > 1.0);
        CHECK_THROWS_AS(decom_loss(row({1.0, 2.0, 3.0}), exact), ShapeError);
    }

    TEST_CASE("reconstruction is symmetric mean row L2")
    {
        CHECK(std::fabs(recons_loss(row({0.6, 0.8}), Matrix::Zero(1, 2)) - 1.0) < 1e-12);
        Rng rng(2);
        const Matrix a = oracle::random_unit(9, 3, rng);
        const Matrix b = oracle::random_unit(9, 3, rng);
        CHECK(recons_loss(a, a) == 0.0);
        CHECK(std::fabs(recons_loss(a, b) - recons_loss(b, a)) < 1e-15);
        CHECK(std::fabs(recons_loss(a, b) - oracle::row_l2_mean(a, b)) < 1e-12);
    }

    TEST_CASE("orthogonality hand values and scale invariance")
    {
        const std::vector<Matrix> disjoint{row({1.0, 0.0, 0.0}), row({0.0, -2.0, 0.5})};
        CHECK(ortho_loss(disjoint) < 1e-15);
        const std::vector<Matrix> parallel{row({1.0, -2.0, 3.0}), row({2.5, -5.0, 7.5})};
        CHECK(std::fabs(ortho_loss(parallel) - std::sqrt(2.0)) < 1e-12);

        Rng rng(7);
        std::vector<Matrix> q{oracle::random_matrix(6, 5, rng), oracle::random_matrix(6, 5, rng),
                              oracle::random_matrix(6, 5, rng)};
        const double base = ortho_loss(q);
        CHECK(std::fabs(base - oracle::ortho(q)) < 1e-12);
        q[1] *= 37.0;
        CHECK(std::fabs(ortho_loss(q) - base) < 1e-12);

        std::vector<Matrix> with_zero{row({0.0, 0.0}), row({1.0, 1.0})};
        CHECK(std::isfinite(ortho_loss(with_zero)));
        std::vector<Matrix> grads;
        ortho_loss(with_zero, &grads);
        CHECK(grads[0].allFinite());
    }

    TEST_CASE("monotonicity hand value and one-sidedness")
    {
        const Matrix x = Matrix::Zero(1, 2);
        CHECK(std::fabs(mono_loss(x, row({0.3, -0.1}), row({-0.1, 0.2})) - 0.2) < 1e-12);

        Rng rng(9);
        const Matrix base = oracle::random_matrix(10, 4, rng);
        const Matrix small = oracle::random_matrix(10, 4, rng, 0.1);
        const Matrix y_z = base + small;
        const Matrix y_zp = base + 3.0 * small;
        CHECK(mono_loss(base, y_z, y_zp) == 0.0);
        CHECK(mono_loss(base, y_zp, y_z) > 0.0);
        CHECK(std::fabs(mono_loss(base, y_zp, y_z) - oracle::mono(base, y_zp, y_z)) < 1e-12);
    }

    TEST_CASE("total generator loss")
    {
        LossReport r;
        r.gan_f = 0.7;
        CHECK(total_generator_loss(r, LossWeights{}) == 0.7);
        r.change = 0.5;
        CHECK(std::fabs(total_generator_loss(r, LossWeights{6, 0, 0, 0, 0, 0}) - 3.7) < 1e-12);

        const LossWeights defaults;
        CHECK(defaults.gamma == 6.0);
        CHECK(defaults.kappa == 80.0);
        CHECK(defaults.zeta == 80.0);
        CHECK(defaults.mu == 500.0);
        CHECK(defaults.eta == 6.0);
        r = LossReport{0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0};
        CHECK(std::fabs(total_generator_loss(r, defaults) - (1 + 6 + 80 + 80 + defaults.lambda + 500 + 6)) < 1e-9);

        CHECK_THROWS_AS(validate(LossWeights{6, 80, 80, -0.1, 500, 6}), ArgumentError);
        CHECK_THROWS_AS(validate(LossWeights{6, 80, std::nan(""), 0.1, 500, 6}), ArgumentError);
    }

    TEST_CASE("component deltas mask all but one latent column")
    {
        const ModelBundle b1 = init_bundle(1, 6, 3);
        Rng rng(3);
        const Matrix x = oracle::random_matrix(4, 6, rng);
        const Matrix z1 = oracle::random_unit(4, 1, rng);
        CHECK(loss::component_deltas(b1, x, z1)[0] == transform(b1, x, z1) - x);

        const ModelBundle b = init_bundle(3, 6, 3);
        const Matrix z = oracle::random_unit(4, 3, rng);
        const auto q = loss::component_deltas(b, x, z);
        REQUIRE(q.size() == 3);
        for (Eigen::Index i = 0; i < 3; ++i) {
            Matrix a = Matrix::Zero(4, 3);
            a.col(i) = z.col(i);
            CHECK(q[static_cast<std::size_t>(i)] == transform(b, x, a) - x);
        }
    }

    TEST_CASE("input gradients of every term match independent oracles")
    {
        Rng rng(31);
        const Matrix x = oracle::random_matrix(8, 5, rng);
        const Matrix y = oracle::random_matrix(8, 5, rng);
        const Matrix yp = oracle::random_matrix(8, 5, rng);
        const double h = 1e-6;
        const double tol = 1e-5;

        Matrix g;
        change_loss(x, y, &g);
        CHECK(oracle::max_relative_error(
                  g, oracle::numeric_gradient([&](const Matrix& v) { return oracle::row_l1_mean(x, v); }, y, h)) < tol);
        cn_loss(x, y, &g);
        CHECK(oracle::max_relative_error(
                  g, oracle::numeric_gradient([&](const Matrix& v) { return oracle::row_l1_mean(x, v); }, y, h)) < tol);

        const Matrix r = oracle::random_unit(8, 3, rng);
        const Matrix z = oracle::random_unit(8, 3, rng);
        recons_loss(r, z, &g);
        CHECK(oracle::max_relative_error(
                  g, oracle::numeric_gradient([&](const Matrix& v) { return oracle::row_l2_mean(v, z); }, r, h)) < tol);

        Matrix gz, gzp;
        mono_loss(x, y, yp, &gz, &gzp);
        CHECK(oracle::max_relative_error(
                  gz, oracle::numeric_gradient([&](const Matrix& v) { return oracle::mono(x, v, yp); }, y, h)) < tol);
        CHECK(oracle::max_relative_error(
                  gzp, oracle::numeric_gradient([&](const Matrix& v) { return oracle::mono(x, y, v); }, yp, h)) < tol);

        Matrix probs = oracle::random_unit(8, 2, rng).array() + 0.1;
        for (Eigen::Index i = 0; i < 8; ++i) probs.row(i) /= probs.row(i).sum();
        cross_entropy(probs, 1, &g);
        const auto ce = [](const Matrix& p) {
            double s = 0.0;
            for (Eigen::Index i = 0; i < p.rows(); ++i) s -= std::log(p(i, 1));
            return s / static_cast<double>(p.rows());
        };
        CHECK(oracle::max_relative_error(g, oracle::numeric_gradient(ce, probs, h)) < tol);

        std::vector<Matrix> q{oracle::random_matrix(8, 5, rng), oracle::random_matrix(8, 5, rng),
                              oracle::random_matrix(8, 5, rng)};
        std::vector<Matrix> gq;
        ortho_loss(q, &gq);
        for (std::size_t i = 0; i < 3; ++i) {
            const auto of_qi = [&](const Matrix& v) {
                auto copy = q;
                copy[i] = v;
                return oracle::ortho(copy);
            };
            CHECK(oracle::max_relative_error(gq[i], oracle::numeric_gradient(of_qi, q[i], h)) < tol);
        }

        const Matrix blocks = oracle::random_matrix(8, 15, rng);
        const auto stacked = [&](const std::vector<Matrix>& parts) {
            Matrix s(8, 15);
            for (std::size_t i = 0; i < parts.size(); ++i) s.middleCols(static_cast<Eigen::Index>(i) * 5, 5) = parts[i];
            return s;
        };
        std::vector<Matrix> gdq;
        decom_loss(blocks, q, &g, &gdq);
        CHECK(oracle::max_relative_error(
                  g, oracle::numeric_gradient([&](const Matrix& v) { return oracle::row_l2_mean(v, stacked(q)); },
                                              blocks, h)) < tol);
        for (std::size_t i = 0; i < 3; ++i) {
            const auto of_qi = [&](const Matrix& v) {
                auto copy = q;
                copy[i] = v;
                return oracle::row_l2_mean(blocks, stacked(copy));
            };
            CHECK(oracle::max_relative_error(gdq[i], oracle::numeric_gradient(of_qi, q[i], h)) < tol);
        }
    }

    TEST_CASE("report line lists every term")
    {
        LossReport r;
        r.mono = 0.25;
        const std::string line = format_report(42, r);
        for (const char* key : {"iter=42", "gan_d=", "gan_f=", "change=", "decom=", "recons=", "ortho=", "mono=0.25",
                                "cn=", "total_f="}) {
            CHECK(line.find(key) != std::string::npos);
        }
    }
}
