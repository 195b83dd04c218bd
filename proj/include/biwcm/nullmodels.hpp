#pragma once

#include <string>
#include <vector>

#include "biwcm/core.hpp"
#include "biwcm/solvers.hpp"

namespace biwcm {

/// Per-link right-tail p-values, P(w >= w*), under a fitted null model.
struct PValueMatrix {
    Matrix<double> values;
    /// natural log of `values`; stays finite when `values` underflows to 0
    Matrix<double> log_values;
    ModelKind model = ModelKind::biwcm_c;
    std::vector<std::string> row_labels;
    std::vector<std::string> col_labels;
    /// short description of the model the p-values came from
    std::string provenance;
};

/// <w_ia> under the model. MERCA models return the Balassa threshold s_i sigma_a / W.
double expected_weight(const FittedModel& fm, std::size_t i, std::size_t a);
Matrix<double> expected_weight_matrix(const FittedModel& fm);

/// s_i sigma_a / W
double balassa_threshold(const StrengthVectors& s, std::size_t i, std::size_t a);

/// Revealed comparative advantage w*_ia / (s_i sigma_a / W). Zero weight gives 0;
/// a positive weight over a zero threshold gives +infinity (validated).
double rca(const Matrix<double>& weights, const StrengthVectors& s, std::size_t i, std::size_t a);
double rca(const WeightedBipartiteGraph& g, const StrengthVectors& s, std::size_t i, std::size_t a);

double log_pvalue(const FittedModel& fm, double w_star, std::size_t i, std::size_t a);
double pvalue(const FittedModel& fm, double w_star, std::size_t i, std::size_t a);

/// Entrywise p-values of `observed`, which must have the model's shape.
PValueMatrix pvalue_matrix(const FittedModel& fm, const Matrix<double>& observed);

/// Entrywise p-values of a graph, matched to the model by label. Rows or columns
/// of `g` the model does not know must be isolated; their links get p-value 1.
PValueMatrix pvalue_matrix(const FittedModel& fm, const WeightedBipartiteGraph& g);

/// Expected weights laid out like `g`; links of nodes unknown to the model are 0.
Matrix<double> expected_weight_matrix(const FittedModel& fm, const WeightedBipartiteGraph& g);

struct SparseRegimeReport {
    /// |<w>_biwcm_d - threshold| / threshold per link
    Matrix<double> relative_difference;
    double max_relative_difference = 0.0;
    double mean_relative_difference = 0.0;
};

/// How far a fitted BiWCM_d sits from Balassa's threshold. In the sparse regime
/// (large multipliers) the two coincide.
SparseRegimeReport sparse_regime_check(const FittedModel& fm_discrete, const StrengthVectors& s);

}  // namespace biwcm
