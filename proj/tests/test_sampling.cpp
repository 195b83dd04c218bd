#include <doctest.h>

#include <cmath>

#include "biwcm/nullmodels.hpp"
#include "biwcm/sampling.hpp"
#include "support.hpp"

using namespace biwcm;
using biwcm::testing::random_graph;

TEST_CASE("samples are deterministic per seed and index") {
    const auto fm = solve(random_graph(5, 6, 0.5, 10, 1), ModelKind::biwcm_d);
    const auto a = sample(fm, 42, 3), b = sample(fm, 42, 3);
    CHECK(a.weights == b.weights);
    CHECK(a.seed == 42);
    CHECK(a.index == 3);
    CHECK_FALSE(sample(fm, 42, 4).weights == a.weights);
    CHECK_FALSE(sample(fm, 43, 3).weights == a.weights);
}

TEST_CASE("sample supports") {
    const auto g = random_graph(6, 7, 0.5, 15, 2);
    for (auto kind : {ModelKind::biwcm_d, ModelKind::biwcm_c, ModelKind::merca_d, ModelKind::merca_c}) {
        const auto s = sample(fit(g, kind), 7);
        CHECK(s.model == kind);
        bool ok = true;
        for (double w : s.weights.data()) {
            ok = ok && w >= 0.0 && std::isfinite(w);
            if (is_discrete(kind)) ok = ok && std::floor(w) == w;
        }
        CHECK(ok);
    }
}

TEST_CASE("single-sample statistics equal that sample") {
    const auto fm = fit(random_graph(3, 4, 0.6, 8, 3), ModelKind::biwcm_c);
    const auto st = ensemble_stats(fm, 1, 9);
    const auto s = sample(fm, 9, 0);
    CHECK(st.n_samples == 1);
    CHECK(st.link_mean == s.weights);
    for (double v : st.link_variance.data()) CHECK(v == 0.0);
    for (std::size_t i = 0; i < 3; ++i) {
        double row = 0.0;
        for (std::size_t a = 0; a < 4; ++a) row += s.weights(i, a);
        CHECK(st.row_strength_mean[i] == doctest::Approx(row).epsilon(1e-15));
    }
    CHECK_THROWS_AS(ensemble_stats(fm, 0, 9), InputError);
}

TEST_CASE("Monte Carlo moments match the closed forms at 5 standard errors") {
    const std::size_t n = 10000;
    const auto g = random_graph(10, 20, 0.4, 6, 11);
    for (auto kind : {ModelKind::biwcm_d, ModelKind::biwcm_c, ModelKind::merca_d}) {
        const auto fm = fit(g, kind);
        const auto st = ensemble_stats(fm, n, 2024);
        const auto s = strengths(g);
        std::size_t mean_misses = 0, var_misses = 0, strength_misses = 0;
        for (std::size_t i = 0; i < 10; ++i) {
            for (std::size_t a = 0; a < 20; ++a) {
                const double mu = expected_weight(fm, i, a);
                // geometric: var = mu (1 + mu); exponential: var = mu^2
                const double var = is_discrete(kind) ? mu * (1 + mu) : mu * mu;
                if (std::abs(st.link_mean(i, a) - mu) > 5 * std::sqrt(var / n)) ++mean_misses;
                // standard error of the sample variance needs the fourth central moment
                const double m4 = is_discrete(kind) ? var * (1 + 9 * mu * (1 + mu)) : 9 * mu * mu * mu * mu;
                if (std::abs(st.link_variance(i, a) - var) > 5 * std::sqrt((m4 - var * var) / n)) ++var_misses;
            }
            double var_s = 0.0;
            for (std::size_t a = 0; a < 20; ++a) {
                const double mu = expected_weight(fm, i, a);
                var_s += is_discrete(kind) ? mu * (1 + mu) : mu * mu;
            }
            if (std::abs(st.row_strength_mean[i] - s.row_strengths[i]) > 5 * std::sqrt(var_s / n)) ++strength_misses;
        }
        CHECK(mean_misses == 0);
        CHECK(var_misses == 0);
        CHECK(strength_misses == 0);
    }
}

TEST_CASE("distinct links are uncorrelated") {
    const auto fm = fit(random_graph(3, 3, 0.8, 5, 4), ModelKind::biwcm_d);
    const std::size_t n = 10000;
    // same row (shared stream) and different rows
    for (auto [i2, a2] : {std::pair<std::size_t, std::size_t>{0, 1}, {2, 2}}) {
        double sx = 0, sy = 0, sxy = 0, sxx = 0, syy = 0;
        for (std::size_t k = 0; k < n; ++k) {
            const auto s = sample(fm, 99, k);
            const double x = s.weights(0, 0), y = s.weights(i2, a2);
            sx += x;
            sy += y;
            sxy += x * y;
            sxx += x * x;
            syy += y * y;
        }
        const double r = (sxy / n - sx / n * sy / n) /
                         std::sqrt((sxx / n - sx / n * sx / n) * (syy / n - sy / n * sy / n));
        CHECK(std::abs(r) <= 5.0 / std::sqrt(static_cast<double>(n)));
    }
}
