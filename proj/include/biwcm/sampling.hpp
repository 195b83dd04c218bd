#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "biwcm/core.hpp"
#include "biwcm/solvers.hpp"

namespace biwcm {

/// One graph drawn from a fitted ensemble.
struct EnsembleSample {
    Matrix<double> weights;
    std::uint64_t seed = 0;
    std::uint64_t index = 0;
    ModelKind model = ModelKind::biwcm_c;
};

/// Draws every link independently: geometric on {0, 1, 2, ...} with
/// P(w >= k) = q^k for discrete models, exponential for continuous ones.
///
/// Seed mapping (stable): row i of draw `index` uses its own std::mt19937_64
/// seeded with std::seed_seq{seed lo32, seed hi32, index lo32, index hi32, i}.
/// Columns consume one 64-bit output each, in order; U = ((x >> 11) + 1) * 2^-53
/// lies in (0, 1]. Geometric draws are floor(ln U / ln q), exponential ones
/// -ln U / rate. Rows are independent streams, so the result does not depend
/// on evaluation order.
EnsembleSample sample(const FittedModel& fm, std::uint64_t seed, std::uint64_t index = 0);

struct EnsembleStats {
    std::size_t n_samples = 0;
    Matrix<double> link_mean;
    /// unbiased sample variance (0 for a single sample)
    Matrix<double> link_variance;
    std::vector<double> row_strength_mean;
    std::vector<double> row_strength_variance;
    std::vector<double> col_strength_mean;
    std::vector<double> col_strength_variance;
};

/// Streaming (Welford) moments over draws 0..n_samples-1 of sample(fm, seed, k).
EnsembleStats ensemble_stats(const FittedModel& fm, std::size_t n_samples, std::uint64_t seed);

}  // namespace biwcm
