#include "biwcm/nullmodels.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <unordered_map>

namespace biwcm {

namespace {

void check_index(const FittedModel& fm, std::size_t i, std::size_t a) {
    if (i >= fm.strengths.row_strengths.size() || a >= fm.strengths.col_strengths.size()) {
        throw Error("link index out of range");
    }
    if (!is_merca(fm.model) && (i >= fm.theta.size() || a >= fm.eta.size())) {
        throw Error("link index out of range");
    }
}

bool isolated(const StrengthVectors& s, std::size_t i, std::size_t a) {
    return !(s.row_strengths[i] > 0.0) || !(s.col_strengths[a] > 0.0);
}

// Maps each graph row/column onto the model, or nullopt for nodes the model
// was fitted without.
struct Alignment {
    std::vector<std::optional<std::size_t>> rows;
    std::vector<std::optional<std::size_t>> cols;
};

std::vector<std::optional<std::size_t>> align_layer(const std::vector<std::string>& model_labels,
                                                    const std::vector<std::string>& graph_labels,
                                                    const std::vector<double>& graph_strengths,
                                                    const char* layer) {
    std::unordered_map<std::string, std::size_t> idx;
    for (std::size_t k = 0; k < model_labels.size(); ++k) idx.emplace(model_labels[k], k);
    std::vector<std::optional<std::size_t>> out(graph_labels.size());
    std::size_t matched = 0;
    for (std::size_t k = 0; k < graph_labels.size(); ++k) {
        const auto it = idx.find(graph_labels[k]);
        if (it != idx.end()) {
            out[k] = it->second;
            ++matched;
        } else if (graph_strengths[k] > 0.0) {
            throw Error(std::string("dimension mismatch: ") + layer + " '" + graph_labels[k] +
                        "' carries weight but is not in the fitted model");
        }
    }
    if (matched != model_labels.size()) {
        throw Error(std::string("dimension mismatch: fitted model has ") + layer + " labels missing from the graph");
    }
    return out;
}

Alignment align(const FittedModel& fm, const WeightedBipartiteGraph& g) {
    const auto s = strengths(g);
    return {align_layer(fm.row_labels, g.row_labels(), s.row_strengths, "row"),
            align_layer(fm.col_labels, g.col_labels(), s.col_strengths, "column")};
}

std::string describe(const FittedModel& fm) {
    std::string d = to_string(fm.model) + " via " + to_string(fm.diagnostics.method);
    if (!is_merca(fm.model)) d += ", residual " + std::to_string(fm.diagnostics.residual);
    return d;
}

}  // namespace

double balassa_threshold(const StrengthVectors& s, std::size_t i, std::size_t a) {
    if (!(s.total_weight > 0.0)) throw Error("Balassa threshold needs W > 0");
    return s.row_strengths.at(i) * s.col_strengths.at(a) / s.total_weight;
}

double rca(const Matrix<double>& weights, const StrengthVectors& s, std::size_t i, std::size_t a) {
    const double w = weights(i, a);
    if (w == 0.0) return 0.0;
    const double threshold = balassa_threshold(s, i, a);
    if (threshold == 0.0) return std::numeric_limits<double>::infinity();
    return w / threshold;
}

double rca(const WeightedBipartiteGraph& g, const StrengthVectors& s, std::size_t i, std::size_t a) {
    return rca(g.weights(), s, i, a);
}

double expected_weight(const FittedModel& fm, std::size_t i, std::size_t a) {
    check_index(fm, i, a);
    if (is_merca(fm.model)) {
        return isolated(fm.strengths, i, a) ? 0.0 : balassa_threshold(fm.strengths, i, a);
    }
    return link_mean(fm.model, fm.theta[i] + fm.eta[a]);
}

Matrix<double> expected_weight_matrix(const FittedModel& fm) {
    Matrix<double> m(fm.n_rows(), fm.n_cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t a = 0; a < m.cols(); ++a) m(i, a) = expected_weight(fm, i, a);
    }
    return m;
}

Matrix<double> expected_weight_matrix(const FittedModel& fm, const WeightedBipartiteGraph& g) {
    const auto al = align(fm, g);
    Matrix<double> m(g.n_rows(), g.n_cols(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        if (!al.rows[i]) continue;
        for (std::size_t a = 0; a < m.cols(); ++a) {
            if (al.cols[a]) m(i, a) = expected_weight(fm, *al.rows[i], *al.cols[a]);
        }
    }
    return m;
}

double log_pvalue(const FittedModel& fm, double w_star, std::size_t i, std::size_t a) {
    check_index(fm, i, a);
    if (!(w_star >= 0.0) || !std::isfinite(w_star)) throw InputError("observed weight must be finite and >= 0");
    if (is_discrete(fm.model) && !is_integer_weight(w_star)) {
        throw InputError("discrete model needs an integer observed weight");
    }
    if (w_star == 0.0) return 0.0;

    switch (fm.model) {
        case ModelKind::biwcm_d:
        case ModelKind::biwcm_c: {
            const double x = fm.theta[i] + fm.eta[a];
            if (!(x > 0.0)) throw Error("multipliers outside the domain: theta_i + eta_a <= 0");
            return -x * w_star;
        }
        case ModelKind::merca_d: {
            if (isolated(fm.strengths, i, a)) return 0.0;
            const double b = balassa_threshold(fm.strengths, i, a);
            // ln[s sigma / (W + s sigma)] = -ln(1 + 1/b)
            return -std::log1p(1.0 / b) * w_star;
        }
        case ModelKind::merca_c: {
            if (isolated(fm.strengths, i, a)) return 0.0;
            return -w_star / balassa_threshold(fm.strengths, i, a);
        }
    }
    return 0.0;
}

double pvalue(const FittedModel& fm, double w_star, std::size_t i, std::size_t a) {
    return std::exp(log_pvalue(fm, w_star, i, a));
}

PValueMatrix pvalue_matrix(const FittedModel& fm, const Matrix<double>& observed) {
    if (observed.rows() != fm.n_rows() || observed.cols() != fm.n_cols()) {
        throw Error("dimension mismatch between observed weights and fitted model");
    }
    PValueMatrix pm{Matrix<double>(observed.rows(), observed.cols()),
                    Matrix<double>(observed.rows(), observed.cols()),
                    fm.model, fm.row_labels, fm.col_labels, describe(fm)};
    for (std::size_t i = 0; i < observed.rows(); ++i) {
        for (std::size_t a = 0; a < observed.cols(); ++a) {
            const double lp = log_pvalue(fm, observed(i, a), i, a);
            pm.log_values(i, a) = lp;
            pm.values(i, a) = std::exp(lp);
        }
    }
    return pm;
}

PValueMatrix pvalue_matrix(const FittedModel& fm, const WeightedBipartiteGraph& g) {
    const auto al = align(fm, g);
    PValueMatrix pm{Matrix<double>(g.n_rows(), g.n_cols(), 1.0),
                    Matrix<double>(g.n_rows(), g.n_cols(), 0.0),
                    fm.model, g.row_labels(), g.col_labels(), describe(fm)};
    for (std::size_t i = 0; i < g.n_rows(); ++i) {
        if (!al.rows[i]) continue;
        for (std::size_t a = 0; a < g.n_cols(); ++a) {
            if (!al.cols[a]) continue;
            const double lp = log_pvalue(fm, g.weight(i, a), *al.rows[i], *al.cols[a]);
            pm.log_values(i, a) = lp;
            pm.values(i, a) = std::exp(lp);
        }
    }
    return pm;
}

SparseRegimeReport sparse_regime_check(const FittedModel& fm_discrete, const StrengthVectors& s) {
    if (fm_discrete.model != ModelKind::biwcm_d) throw Error("sparse regime check needs a fitted biwcm_d model");
    SparseRegimeReport r{Matrix<double>(fm_discrete.n_rows(), fm_discrete.n_cols(), 0.0), 0.0, 0.0};
    for (std::size_t i = 0; i < fm_discrete.n_rows(); ++i) {
        for (std::size_t a = 0; a < fm_discrete.n_cols(); ++a) {
            const double threshold = balassa_threshold(s, i, a);
            const double d = std::abs(expected_weight(fm_discrete, i, a) - threshold) / threshold;
            r.relative_difference(i, a) = d;
            r.max_relative_difference = std::max(r.max_relative_difference, d);
            r.mean_relative_difference += d;
        }
    }
    if (r.relative_difference.size() > 0) r.mean_relative_difference /= static_cast<double>(r.relative_difference.size());
    return r;
}

}  // namespace biwcm
