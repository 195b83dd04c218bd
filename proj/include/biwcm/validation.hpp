#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "biwcm/core.hpp"
#include "biwcm/nullmodels.hpp"
#include "biwcm/solvers.hpp"

namespace biwcm {

enum class Procedure { mu, alpha };

std::string to_string(Procedure p);
Procedure parse_procedure(std::string_view name);

struct ValidatedMatrix {
    BinaryMatrix matrix;
    Procedure procedure = Procedure::mu;
    ModelKind model = ModelKind::biwcm_c;
    std::vector<std::string> row_labels;
    std::vector<std::string> col_labels;
    // alpha procedure only
    std::optional<double> alpha_level;
    std::optional<double> fdr_threshold;
    /// number of hypotheses in the FDR correction (every cell, zero weights included)
    std::size_t n_tests = 0;

    std::size_t n_validated() const;
};

struct FdrResult {
    /// i* alpha / n, or 0 when nothing is discovered
    double threshold = 0.0;
    std::size_t discoveries = 0;
};

/// Benjamini-Hochberg: sort ascending, take the largest rank i with
/// p_(i) <= i alpha / n.
FdrResult fdr_threshold(std::span<const double> pvalues, double alpha);

/// Same on natural-log p-values, which keeps the ordering of underflowed p-values.
FdrResult fdr_threshold_log(std::span<const double> log_pvalues, double alpha);

/// m_ia = 1 iff w*_ia > 0 and w*_ia >= <w_ia> (boundary inclusive).
ValidatedMatrix mu_validate(const WeightedBipartiteGraph& g, const FittedModel& fm);

/// Links whose p-value survives FDR at level alpha over all N_top * N_bot cells.
ValidatedMatrix alpha_validate(const WeightedBipartiteGraph& g, const PValueMatrix& pm, double alpha = 0.05);

/// Balassa binarization: RCA_ia >= 1.
BinaryMatrix rca_binarize(const WeightedBipartiteGraph& g);

}  // namespace biwcm
