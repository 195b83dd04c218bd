#include "biwcm/core.hpp"

#include <cmath>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace biwcm {

namespace {

void require_unique(const std::vector<std::string>& labels, const char* layer) {
    std::unordered_set<std::string> seen;
    for (const auto& label : labels) {
        if (!seen.insert(label).second) {
            throw InputError(std::string("duplicate ") + layer + " label '" + label + "'");
        }
    }
}

std::unordered_map<std::string, std::size_t> index_of(const std::vector<std::string>& labels) {
    std::unordered_map<std::string, std::size_t> idx;
    idx.reserve(labels.size());
    for (std::size_t k = 0; k < labels.size(); ++k) idx.emplace(labels[k], k);
    return idx;
}

}  // namespace

std::string to_string(WeightMode mode) {
    return mode == WeightMode::discrete ? "discrete" : "continuous";
}

bool is_integer_weight(double w) noexcept {
    return std::isfinite(w) && std::floor(w) == w;
}

WeightedBipartiteGraph::WeightedBipartiteGraph(std::vector<std::string> row_labels,
                                               std::vector<std::string> col_labels,
                                               Matrix<double> weights,
                                               WeightMode mode)
    : row_labels_(std::move(row_labels)),
      col_labels_(std::move(col_labels)),
      weights_(std::move(weights)),
      mode_(mode) {
    if (row_labels_.size() != weights_.rows() || col_labels_.size() != weights_.cols()) {
        throw InputError("label count does not match weight matrix shape");
    }
    require_unique(row_labels_, "row");
    require_unique(col_labels_, "column");

    bool any_positive = false;
    for (std::size_t i = 0; i < weights_.rows(); ++i) {
        for (std::size_t a = 0; a < weights_.cols(); ++a) {
            const double w = weights_(i, a);
            if (!std::isfinite(w)) {
                throw InputError("non-finite weight at (" + row_labels_[i] + ", " + col_labels_[a] + ")");
            }
            if (w < 0.0) {
                throw InputError("negative weight at (" + row_labels_[i] + ", " + col_labels_[a] + ")");
            }
            if (mode_ == WeightMode::discrete && !is_integer_weight(w)) {
                std::ostringstream msg;
                msg.precision(17);
                msg << "non-integer weight " << w << " at (" << row_labels_[i] << ", " << col_labels_[a]
                    << ") in discrete mode";
                throw InputError(msg.str());
            }
            any_positive = any_positive || w > 0.0;
        }
    }
    if (!any_positive) throw InputError("graph has no strictly positive weight");
}

WeightedBipartiteGraph WeightedBipartiteGraph::with_mode(WeightMode mode) const {
    return WeightedBipartiteGraph(row_labels_, col_labels_, weights_, mode);
}

WeightedBipartiteGraph build_graph(std::vector<std::string> rows,
                                   std::vector<std::string> cols,
                                   const std::vector<Entry>& entries,
                                   WeightMode mode) {
    require_unique(rows, "row");
    require_unique(cols, "column");
    const auto row_idx = index_of(rows);
    const auto col_idx = index_of(cols);

    Matrix<double> w(rows.size(), cols.size(), 0.0);
    for (const auto& e : entries) {
        const auto r = row_idx.find(e.row);
        if (r == row_idx.end()) throw InputError("unknown row label '" + e.row + "'");
        const auto c = col_idx.find(e.col);
        if (c == col_idx.end()) throw InputError("unknown column label '" + e.col + "'");
        if (e.weight < 0.0) {
            throw InputError("negative weight at (" + e.row + ", " + e.col + ")");
        }
        w(r->second, c->second) += e.weight;
    }
    return WeightedBipartiteGraph(std::move(rows), std::move(cols), std::move(w), mode);
}

StrengthVectors strengths(const WeightedBipartiteGraph& g) {
    StrengthVectors s;
    s.row_strengths.assign(g.n_rows(), 0.0);
    s.col_strengths.assign(g.n_cols(), 0.0);
    const auto& w = g.weights();
    for (std::size_t i = 0; i < g.n_rows(); ++i) {
        for (std::size_t a = 0; a < g.n_cols(); ++a) {
            s.row_strengths[i] += w(i, a);
            s.col_strengths[a] += w(i, a);
        }
    }
    for (double si : s.row_strengths) s.total_weight += si;
    return s;
}

double connectance(const BinaryMatrix& m) {
    if (m.empty()) throw InputError("connectance of an empty matrix");
    std::size_t ones = 0;
    for (auto v : m.data()) ones += v != 0 ? 1 : 0;
    return static_cast<double>(ones) / static_cast<double>(m.size());
}

ReducedGraph drop_isolated(const WeightedBipartiteGraph& g) {
    const auto s = strengths(g);
    std::vector<std::size_t> keep_rows, keep_cols;
    std::vector<std::string> dropped_rows, dropped_cols;
    for (std::size_t i = 0; i < g.n_rows(); ++i) {
        if (s.row_strengths[i] > 0.0) keep_rows.push_back(i);
        else dropped_rows.push_back(g.row_labels()[i]);
    }
    for (std::size_t a = 0; a < g.n_cols(); ++a) {
        if (s.col_strengths[a] > 0.0) keep_cols.push_back(a);
        else dropped_cols.push_back(g.col_labels()[a]);
    }

    std::vector<std::string> rows, cols;
    for (auto i : keep_rows) rows.push_back(g.row_labels()[i]);
    for (auto a : keep_cols) cols.push_back(g.col_labels()[a]);
    Matrix<double> w(keep_rows.size(), keep_cols.size());
    for (std::size_t r = 0; r < keep_rows.size(); ++r) {
        for (std::size_t c = 0; c < keep_cols.size(); ++c) w(r, c) = g.weight(keep_rows[r], keep_cols[c]);
    }
    return {WeightedBipartiteGraph(std::move(rows), std::move(cols), std::move(w), g.mode()),
            std::move(dropped_rows), std::move(dropped_cols)};
}

}  // namespace biwcm
