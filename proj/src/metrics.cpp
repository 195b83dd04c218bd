#include "biwcm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace biwcm {

namespace {

void normalize_to_unit_mean(std::vector<double>& v) {
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    for (double& x : v) x /= mean;
}

double relative_change(double before, double after) {
    if (before == after) return 0.0;
    const double scale = std::max(std::abs(before), std::abs(after));
    return std::abs(after - before) / scale;
}

}  // namespace

RankingResult fitness_complexity(const Matrix<double>& m, const FitnessComplexityConfig& config,
                                 const FitnessObserver& observer) {
    if (config.max_iterations < 1) throw InputError("max_iterations must be at least 1");
    for (double v : m.data()) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw InputError("fitness-complexity needs a nonnegative matrix");
    }

    RankingResult r;
    std::vector<double> row_sum(m.rows(), 0.0), col_sum(m.cols(), 0.0);
    for (std::size_t c = 0; c < m.rows(); ++c) {
        for (std::size_t p = 0; p < m.cols(); ++p) {
            row_sum[c] += m(c, p);
            col_sum[p] += m(c, p);
        }
    }
    for (std::size_t c = 0; c < m.rows(); ++c) (row_sum[c] > 0.0 ? r.kept_rows : r.dropped_rows).push_back(c);
    for (std::size_t p = 0; p < m.cols(); ++p) (col_sum[p] > 0.0 ? r.kept_cols : r.dropped_cols).push_back(p);
    if (r.kept_rows.empty() || r.kept_cols.empty()) throw InputError("matrix is empty after dropping zero rows and columns");

    const std::size_t nc = r.kept_rows.size();
    const std::size_t np = r.kept_cols.size();
    Matrix<double> sub(nc, np);
    for (std::size_t c = 0; c < nc; ++c) {
        for (std::size_t p = 0; p < np; ++p) sub(c, p) = m(r.kept_rows[c], r.kept_cols[p]);
    }

    std::vector<double> fitness(nc, 1.0), complexity(np, 1.0);
    std::vector<double> next_f(nc), next_q(np);
    for (int it = 1; it <= config.max_iterations; ++it) {
        for (std::size_t c = 0; c < nc; ++c) {
            double f = 0.0;
            for (std::size_t p = 0; p < np; ++p) f += sub(c, p) * complexity[p];
            next_f[c] = f;
        }
        for (std::size_t p = 0; p < np; ++p) {
            double inv = 0.0;
            for (std::size_t c = 0; c < nc; ++c) {
                // skip zeros so that 0 * (1/0) never appears once a fitness underflows
                if (sub(c, p) > 0.0) inv += sub(c, p) / fitness[c];
            }
            next_q[p] = 1.0 / inv;
        }
        normalize_to_unit_mean(next_f);
        normalize_to_unit_mean(next_q);

        double change = 0.0;
        for (std::size_t c = 0; c < nc; ++c) change = std::max(change, relative_change(fitness[c], next_f[c]));
        for (std::size_t p = 0; p < np; ++p) change = std::max(change, relative_change(complexity[p], next_q[p]));
        fitness.swap(next_f);
        complexity.swap(next_q);
        r.iterations = it;
        r.max_relative_change = change;
        if (observer) observer(it, fitness, complexity);
        if (change <= config.tolerance) {
            r.converged = true;
            break;
        }
    }
    r.fitness = std::move(fitness);
    r.complexity = std::move(complexity);
    return r;
}

RankingResult fitness_complexity(const BinaryMatrix& m, const FitnessComplexityConfig& config,
                                 const FitnessObserver& observer) {
    Matrix<double> d(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) d(i, j) = m(i, j) != 0 ? 1.0 : 0.0;
    }
    return fitness_complexity(d, config, observer);
}

std::vector<std::size_t> descending_order(std::span<const double> scores) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return scores[l] > scores[r]; });
    return order;
}

std::vector<std::size_t> ranks_descending(std::span<const double> scores) {
    const auto order = descending_order(scores);
    std::vector<std::size_t> rank(scores.size());
    for (std::size_t k = 0; k < order.size(); ++k) rank[order[k]] = k + 1;
    return rank;
}

double snodf(const BinaryMatrix& m, NodfVariant variant) {
    if (m.rows() < 2 || m.cols() < 2) throw InputError("nestedness needs at least two rows and two columns");

    // Sum of paired overlaps over one layer; `line(k)` lists the k-th row (or column).
    auto layer_sum = [&](std::size_t count, std::size_t length, auto at) {
        std::vector<std::size_t> degree(count, 0);
        for (std::size_t k = 0; k < count; ++k) {
            for (std::size_t l = 0; l < length; ++l) degree[k] += at(k, l) ? 1 : 0;
        }
        double sum = 0.0;
        for (std::size_t i = 0; i < count; ++i) {
            for (std::size_t j = i + 1; j < count; ++j) {
                const std::size_t hi = std::max(degree[i], degree[j]);
                const std::size_t lo = std::min(degree[i], degree[j]);
                if (lo == 0) continue;
                if (variant == NodfVariant::classic && hi == lo) continue;
                std::size_t overlap = 0;
                for (std::size_t l = 0; l < length; ++l) overlap += (at(i, l) && at(j, l)) ? 1 : 0;
                sum += static_cast<double>(overlap) / static_cast<double>(lo);
            }
        }
        return sum;
    };

    const double rows = layer_sum(m.rows(), m.cols(), [&](std::size_t k, std::size_t l) { return m(k, l) != 0; });
    const double cols = layer_sum(m.cols(), m.rows(), [&](std::size_t k, std::size_t l) { return m(l, k) != 0; });
    const double pairs = 0.5 * static_cast<double>(m.rows() * (m.rows() - 1) + m.cols() * (m.cols() - 1));
    return (rows + cols) / pairs;
}

std::vector<double> average_ranks(std::span<const double> x) {
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return x[l] < x[r]; });
    std::vector<double> rank(x.size());
    std::size_t k = 0;
    while (k < order.size()) {
        std::size_t end = k + 1;
        while (end < order.size() && x[order[end]] == x[order[k]]) ++end;
        // positions k..end-1 hold ranks k+1..end
        const double shared = 0.5 * static_cast<double>(k + 1 + end);
        for (std::size_t t = k; t < end; ++t) rank[order[t]] = shared;
        k = end;
    }
    return rank;
}

double spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw InputError("spearman needs vectors of equal length");
    if (x.size() < 2) throw InputError("spearman needs at least two observations");
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t k = 0; k < rx.size(); ++k) {
        sxy += (rx[k] - mx) * (ry[k] - my);
        sxx += (rx[k] - mx) * (rx[k] - mx);
        syy += (ry[k] - my) * (ry[k] - my);
    }
    if (sxx == 0.0 || syy == 0.0) throw InputError("spearman is undefined for a constant vector");
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace biwcm
