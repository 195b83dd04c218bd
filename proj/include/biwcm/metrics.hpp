#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "biwcm/core.hpp"

namespace biwcm {

/// Fitness of rows and Complexity of columns. Vectors cover the kept (non-empty)
/// rows and columns only; `kept_*` maps them back to the input indices.
struct RankingResult {
    std::vector<double> fitness;
    std::vector<double> complexity;
    std::vector<std::size_t> kept_rows;
    std::vector<std::size_t> kept_cols;
    std::vector<std::size_t> dropped_rows;
    std::vector<std::size_t> dropped_cols;
    int iterations = 0;
    bool converged = false;
    double max_relative_change = 0.0;
};

struct FitnessComplexityConfig {
    int max_iterations = 1000;
    /// stop once the largest relative change of any score is at most this
    double tolerance = 1e-10;
};

/// Called after each normalized iteration with the current fitness and complexity.
using FitnessObserver = std::function<void(int, std::span<const double>, std::span<const double>)>;

/// Coupled Fitness-Complexity iteration from the all-ones start:
///   F~_c = sum_p M_cp Q_p,  Q~_p = 1 / sum_c M_cp / F_c,
/// each then divided by its mean. Any nonnegative matrix is accepted (e.g. a
/// 1 - p-value matrix). All-zero rows and columns are dropped first.
/// Non-convergence is reported, not thrown.
RankingResult fitness_complexity(const Matrix<double>& m, const FitnessComplexityConfig& config = {},
                                 const FitnessObserver& observer = {});
RankingResult fitness_complexity(const BinaryMatrix& m, const FitnessComplexityConfig& config = {},
                                 const FitnessObserver& observer = {});

/// Indices sorted by decreasing score, ties by index.
std::vector<std::size_t> descending_order(std::span<const double> scores);

/// 1-based position of each element in descending_order (1 = highest score).
std::vector<std::size_t> ranks_descending(std::span<const double> scores);

enum class NodfVariant {
    /// pairs with equal degree also contribute
    stable,
    /// Almeida-Neto NODF: equal-degree pairs contribute 0
    classic,
};

/// Nestedness in [0, 1]: mean over all unordered row pairs and column pairs of
/// |N_i and N_j| / k_j, where k_i >= k_j > 0 (stable) or k_i > k_j > 0 (classic);
/// other pairs contribute 0.
double snodf(const BinaryMatrix& m, NodfVariant variant = NodfVariant::stable);

/// Ranks starting at 1; tied values share the average of their ranks.
std::vector<double> average_ranks(std::span<const double> x);

/// Pearson correlation of average ranks.
double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace biwcm
