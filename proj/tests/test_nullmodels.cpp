#include <doctest.h>

#include <cmath>

#include "biwcm/nullmodels.hpp"
#include "support.hpp"

using namespace biwcm;
using biwcm::testing::from_rows;
using biwcm::testing::random_graph;
using biwcm::testing::rel_diff;

namespace {

FittedModel hand_model(ModelKind kind, std::vector<double> theta, std::vector<double> eta) {
    FittedModel fm;
    fm.model = kind;
    fm.row_labels = biwcm::testing::labels("r", theta.size());
    fm.col_labels = biwcm::testing::labels("c", eta.size());
    fm.theta = std::move(theta);
    fm.eta = std::move(eta);
    fm.strengths = expected_strengths(kind, fm.theta, fm.eta);
    return fm;
}

// s_0 = 10, sigma_0 = 20, W = 100, w_00 = 4
WeightedBipartiteGraph balassa_fixture() { return from_rows({{4, 6}, {16, 74}}, WeightMode::discrete); }

}  // namespace

TEST_CASE("expected weights") {
    CHECK(expected_weight(hand_model(ModelKind::biwcm_c, {1.0 / 3}, {1.0 / 3}), 0, 0) ==
          doctest::Approx(1.5).epsilon(1e-15));
    const double half_ln2 = 0.5 * std::log(2.0);
    CHECK(expected_weight(hand_model(ModelKind::biwcm_d, {half_ln2}, {half_ln2}), 0, 0) ==
          doctest::Approx(1.0).epsilon(1e-14));
    for (auto kind : {ModelKind::merca_d, ModelKind::merca_c}) {
        const auto fm = fit_merca(balassa_fixture(), kind);
        CHECK(expected_weight(fm, 0, 0) == doctest::Approx(2.0).epsilon(1e-15));
    }
}

TEST_CASE("Balassa threshold") {
    const auto s = strengths(balassa_fixture());
    CHECK(balassa_threshold(s, 0, 0) == doctest::Approx(2.0).epsilon(1e-15));
    const StrengthVectors zero_row{{0, 5}, {2, 3}, 5};
    CHECK(balassa_threshold(zero_row, 0, 1) == 0.0);
    const auto ones = strengths(from_rows({{1, 1}, {1, 1}}));
    CHECK(balassa_threshold(ones, 1, 0) == 1.0);
}

TEST_CASE("RCA") {
    const auto g = balassa_fixture();
    const auto s = strengths(g);
    CHECK(rca(g, s, 0, 0) == doctest::Approx(2.0).epsilon(1e-15));

    const auto z = from_rows({{0, 3}, {2, 1}});
    CHECK(rca(z, strengths(z), 0, 0) == 0.0);

    // threshold forced to zero by an inconsistent strength vector
    const StrengthVectors fake{{0, 6}, {2, 4}, 6};
    CHECK(std::isinf(rca(z.weights(), fake, 0, 1)));

    const auto uniform = from_rows({{2, 2, 2}, {2, 2, 2}});
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t a = 0; a < 3; ++a) CHECK(rca(uniform, strengths(uniform), i, a) == 1.0);
    }
}

TEST_CASE("scalar p-values") {
    SUBCASE("w* = 0 gives exactly 1 for every model") {
        const auto g = balassa_fixture();
        for (auto kind : {ModelKind::merca_d, ModelKind::merca_c}) CHECK(pvalue(fit_merca(g, kind), 0.0, 0, 0) == 1.0);
        CHECK(pvalue(hand_model(ModelKind::biwcm_c, {0.2}, {0.3}), 0.0, 0, 0) == 1.0);
        CHECK(pvalue(hand_model(ModelKind::biwcm_d, {0.2}, {0.3}), 0.0, 0, 0) == 1.0);
    }
    SUBCASE("closed values") {
        CHECK(pvalue(hand_model(ModelKind::biwcm_c, {1.0 / 3}, {1.0 / 3}), 3.0, 0, 0) ==
              doctest::Approx(std::exp(-2.0)).epsilon(1e-14));
        CHECK(pvalue(fit_merca(balassa_fixture(), ModelKind::merca_d), 4.0, 0, 0) ==
              doctest::Approx(16.0 / 81.0).epsilon(1e-14));
        CHECK(pvalue(fit_merca(balassa_fixture(), ModelKind::merca_c), 4.0, 0, 0) ==
              doctest::Approx(std::exp(-2.0)).epsilon(1e-14));
        const auto d = hand_model(ModelKind::biwcm_d, {0.4}, {0.3});
        CHECK(pvalue(d, 5.0, 0, 0) == doctest::Approx(std::exp(-0.7 * 5)).epsilon(1e-14));
    }
    SUBCASE("log p-value stays finite when the p-value underflows") {
        const auto fm = hand_model(ModelKind::biwcm_c, {5.0}, {5.0});
        CHECK(pvalue(fm, 1000.0, 0, 0) == 0.0);
        CHECK(log_pvalue(fm, 1000.0, 0, 0) == doctest::Approx(-10000.0));
    }
    SUBCASE("errors") {
        const auto d = hand_model(ModelKind::biwcm_d, {0.4}, {0.3});
        CHECK_THROWS_AS(pvalue(d, 1.5, 0, 0), InputError);
        CHECK_THROWS_AS(pvalue(d, -1.0, 0, 0), InputError);
        CHECK_THROWS_AS(pvalue(hand_model(ModelKind::biwcm_c, {-0.5}, {0.3}), 1.0, 0, 0), Error);
    }
}

TEST_CASE("p-value matrix") {
    SUBCASE("all-zero observed weights give all ones") {
        const auto fm = solve(random_graph(3, 4, 0.6, 9, 5), ModelKind::biwcm_d);
        const auto pm = pvalue_matrix(fm, Matrix<double>(3, 4, 0.0));
        for (double p : pm.values.data()) CHECK(p == 1.0);
        for (double lp : pm.log_values.data()) CHECK(lp == 0.0);
    }
    SUBCASE("loop oracle on random 3x3 instances") {
        for (std::uint64_t seed = 1; seed <= 4; ++seed) {
            const auto g = random_graph(3, 3, 0.7, 12, seed);
            for (auto kind : {ModelKind::biwcm_d, ModelKind::biwcm_c, ModelKind::merca_d, ModelKind::merca_c}) {
                const auto fm = fit(g, kind);
                const auto pm = pvalue_matrix(fm, g);
                CHECK(pm.model == kind);
                CHECK(pm.row_labels == g.row_labels());
                for (std::size_t i = 0; i < 3; ++i) {
                    for (std::size_t a = 0; a < 3; ++a) {
                        CHECK(pm.values(i, a) == pvalue(fm, g.weight(i, a), i, a));
                        CHECK(pm.values(i, a) >= 0.0);
                        CHECK(pm.values(i, a) <= 1.0);
                    }
                }
            }
        }
    }
    SUBCASE("nodes unknown to the model must be isolated") {
        const auto g = from_rows({{1, 0, 2}, {0, 0, 0}, {3, 0, 1}}, WeightMode::discrete);
        const auto fm = solve(drop_isolated(g).graph, ModelKind::biwcm_d);
        const auto pm = pvalue_matrix(fm, g);
        CHECK(pm.values(1, 0) == 1.0);
        CHECK(pm.values(0, 1) == 1.0);
        CHECK(pm.values(2, 2) == pvalue(fm, 1.0, 1, 1));
        CHECK_THROWS_AS(pvalue_matrix(fm, Matrix<double>(2, 5, 0.0)), Error);
    }
}

TEST_CASE("property: p-values decrease with the observed weight") {
    const auto g = random_graph(4, 5, 0.6, 10, 9);
    for (auto kind : {ModelKind::biwcm_d, ModelKind::biwcm_c, ModelKind::merca_d, ModelKind::merca_c}) {
        const auto fm = fit(g, kind);
        for (std::size_t i = 0; i < 4; ++i) {
            for (std::size_t a = 0; a < 5; ++a) {
                double previous = 1.0;
                for (int w = 1; w <= 30; ++w) {
                    const double lp = log_pvalue(fm, w, i, a);
                    CHECK(lp < std::log(previous));
                    previous = std::exp(lp);
                }
            }
        }
    }
}

TEST_CASE("property: MERCA expected weights reproduce the observed strengths") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto g = random_graph(7, 11, 0.4, 50, seed);
        const auto fm = fit_merca(g, ModelKind::merca_c);
        const auto e = expected_weight_matrix(fm);
        const auto s = strengths(g);
        for (std::size_t i = 0; i < 7; ++i) {
            double row = 0.0;
            for (std::size_t a = 0; a < 11; ++a) row += e(i, a);
            CHECK(rel_diff(row, s.row_strengths[i]) <= 1e-12);
        }
        for (std::size_t a = 0; a < 11; ++a) {
            double col = 0.0;
            for (std::size_t i = 0; i < 7; ++i) col += e(i, a);
            CHECK(rel_diff(col, s.col_strengths[a]) <= 1e-12);
        }
    }
}

TEST_CASE("sparse regime check") {
    SUBCASE("sparse instance agrees with the Balassa threshold") {
        // permutation matrix plus a few extra links: every expected weight is tiny
        Matrix<double> w(100, 100, 0.0);
        for (std::size_t k = 0; k < 100; ++k) w(k, (k * 37) % 100) = 1;
        w(0, 1) += 1;
        w(10, 50) += 1;
        w(20, 3) += 1;
        w(30, 70) += 1;
        w(40, 99) += 1;
        const auto g = biwcm::testing::from_matrix(w, WeightMode::discrete);
        const auto fm = solve(g, ModelKind::biwcm_d);
        const auto e = expected_weight_matrix(fm);
        for (double x : e.data()) REQUIRE(x <= 0.05);
        const auto report = sparse_regime_check(fm, strengths(g));
        CHECK(report.max_relative_difference <= 0.05);
        CHECK(report.mean_relative_difference <= report.max_relative_difference);
        // independent recomputation of the reported maximum
        const auto s = strengths(g);
        double worst = 0.0;
        for (std::size_t i = 0; i < 100; ++i) {
            for (std::size_t a = 0; a < 100; ++a) {
                const double t = s.row_strengths[i] * s.col_strengths[a] / s.total_weight;
                worst = std::max(worst, std::abs(e(i, a) - t) / t);
            }
        }
        CHECK(report.max_relative_difference == doctest::Approx(worst).epsilon(1e-12));
    }
    SUBCASE("single link") {
        const auto g = from_rows({{3}}, WeightMode::discrete);
        const auto fm = solve(g, ModelKind::biwcm_d);
        CHECK(expected_weight(fm, 0, 0) == doctest::Approx(3.0).epsilon(1e-8));
        CHECK(sparse_regime_check(fm, strengths(g)).max_relative_difference <= 1e-8);
    }
    SUBCASE("dense instance runs") {
        const auto g = random_graph(5, 5, 1.0, 100, 2);
        const auto report = sparse_regime_check(solve(g, ModelKind::biwcm_d), strengths(g));
        CHECK(report.relative_difference.rows() == 5);
        CHECK(std::isfinite(report.max_relative_difference));
    }
}
