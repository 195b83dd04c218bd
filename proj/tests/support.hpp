#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "biwcm/core.hpp"

namespace biwcm::testing {

inline std::vector<std::string> labels(const std::string& prefix, std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t k = 0; k < n; ++k) out.push_back(prefix + std::to_string(k));
    return out;
}

inline WeightedBipartiteGraph from_matrix(const Matrix<double>& w, WeightMode mode = WeightMode::continuous) {
    return WeightedBipartiteGraph(labels("r", w.rows()), labels("c", w.cols()), w, mode);
}

inline WeightedBipartiteGraph from_rows(const std::vector<std::vector<double>>& rows,
                                        WeightMode mode = WeightMode::continuous) {
    Matrix<double> w(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t a = 0; a < rows[i].size(); ++a) w(i, a) = rows[i][a];
    }
    return from_matrix(w, mode);
}

/// Integer weights in [1, max_weight] with the given density; every row and
/// column gets at least one positive entry so nothing is isolated.
inline WeightedBipartiteGraph random_graph(std::size_t rows, std::size_t cols, double density, int max_weight,
                                           std::uint64_t seed, WeightMode mode = WeightMode::discrete) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> wd(1, max_weight);
    Matrix<double> w(rows, cols, 0.0);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t a = 0; a < cols; ++a) {
            if (u(rng) < density) w(i, a) = wd(rng);
        }
    }
    for (std::size_t i = 0; i < rows; ++i) {
        bool any = false;
        for (std::size_t a = 0; a < cols; ++a) any = any || w(i, a) > 0;
        if (!any) w(i, rng() % cols) = wd(rng);
    }
    for (std::size_t a = 0; a < cols; ++a) {
        bool any = false;
        for (std::size_t i = 0; i < rows; ++i) any = any || w(i, a) > 0;
        if (!any) w(rng() % rows, a) = wd(rng);
    }
    return from_matrix(w, mode);
}

inline std::vector<double> random_vector(std::size_t n, double lo, double hi, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

inline double rel_diff(double a, double b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

}  // namespace biwcm::testing
