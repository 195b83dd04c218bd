#include "biwcm/validation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace biwcm {

std::string to_string(Procedure p) { return p == Procedure::mu ? "mu" : "alpha"; }

Procedure parse_procedure(std::string_view name) {
    if (name == "mu") return Procedure::mu;
    if (name == "alpha") return Procedure::alpha;
    throw InputError("unknown procedure '" + std::string(name) + "'");
}

std::size_t ValidatedMatrix::n_validated() const {
    return static_cast<std::size_t>(std::count(matrix.data().begin(), matrix.data().end(), std::uint8_t{1}));
}

FdrResult fdr_threshold_log(std::span<const double> log_pvalues, double alpha) {
    if (log_pvalues.empty()) throw InputError("FDR needs at least one p-value");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw InputError("FDR level alpha must lie in (0, 1]");
    for (double lp : log_pvalues) {
        if (std::isnan(lp) || lp > 0.0) throw InputError("p-values must lie in [0, 1]");
    }

    std::vector<std::size_t> order(log_pvalues.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    // ties keep their original (row-major) order
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t l, std::size_t r) { return log_pvalues[l] < log_pvalues[r]; });

    const double n = static_cast<double>(log_pvalues.size());
    FdrResult out;
    for (std::size_t k = order.size(); k >= 1; --k) {
        const double level = static_cast<double>(k) * alpha / n;
        if (log_pvalues[order[k - 1]] <= std::log(level)) {
            out.threshold = level;
            out.discoveries = k;
            break;
        }
    }
    return out;
}

FdrResult fdr_threshold(std::span<const double> pvalues, double alpha) {
    std::vector<double> logs(pvalues.size());
    for (std::size_t k = 0; k < pvalues.size(); ++k) {
        if (!(pvalues[k] >= 0.0 && pvalues[k] <= 1.0)) throw InputError("p-values must lie in [0, 1]");
        logs[k] = std::log(pvalues[k]);
    }
    return fdr_threshold_log(logs, alpha);
}

ValidatedMatrix mu_validate(const WeightedBipartiteGraph& g, const FittedModel& fm) {
    const auto expected = expected_weight_matrix(fm, g);
    ValidatedMatrix v;
    v.matrix = BinaryMatrix(g.n_rows(), g.n_cols(), 0);
    v.procedure = Procedure::mu;
    v.model = fm.model;
    v.row_labels = g.row_labels();
    v.col_labels = g.col_labels();
    for (std::size_t i = 0; i < g.n_rows(); ++i) {
        for (std::size_t a = 0; a < g.n_cols(); ++a) {
            const double w = g.weight(i, a);
            v.matrix(i, a) = (w > 0.0 && w >= expected(i, a)) ? 1 : 0;
        }
    }
    return v;
}

ValidatedMatrix alpha_validate(const WeightedBipartiteGraph& g, const PValueMatrix& pm, double alpha) {
    if (pm.log_values.rows() != g.n_rows() || pm.log_values.cols() != g.n_cols()) {
        throw Error("dimension mismatch between p-value matrix and graph");
    }
    const auto fdr = fdr_threshold_log(pm.log_values.data(), alpha);
    ValidatedMatrix v;
    v.matrix = BinaryMatrix(g.n_rows(), g.n_cols(), 0);
    v.procedure = Procedure::alpha;
    v.model = pm.model;
    v.row_labels = g.row_labels();
    v.col_labels = g.col_labels();
    v.alpha_level = alpha;
    v.fdr_threshold = fdr.threshold;
    v.n_tests = pm.log_values.size();
    if (fdr.discoveries == 0) return v;

    const double log_threshold = std::log(fdr.threshold);
    for (std::size_t i = 0; i < g.n_rows(); ++i) {
        for (std::size_t a = 0; a < g.n_cols(); ++a) {
            v.matrix(i, a) = pm.log_values(i, a) <= log_threshold ? 1 : 0;
        }
    }
    return v;
}

BinaryMatrix rca_binarize(const WeightedBipartiteGraph& g) {
    const auto s = strengths(g);
    BinaryMatrix m(g.n_rows(), g.n_cols(), 0);
    for (std::size_t i = 0; i < g.n_rows(); ++i) {
        for (std::size_t a = 0; a < g.n_cols(); ++a) m(i, a) = rca(g, s, i, a) >= 1.0 ? 1 : 0;
    }
    return m;
}

}  // namespace biwcm
