#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace biwcm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (bad labels, negative weights, ...).
class InputError : public Error {
public:
    using Error::Error;
};

/// Dense row-major matrix with value semantics.
template <class T>
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    const std::vector<T>& data() const noexcept { return data_; }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

using BinaryMatrix = Matrix<std::uint8_t>;

enum class WeightMode { discrete, continuous };

std::string to_string(WeightMode mode);

struct Entry {
    std::string row;
    std::string col;
    double weight = 0.0;
};

/// Marginals of a weighted biadjacency matrix: s_i, sigma_alpha and W.
struct StrengthVectors {
    std::vector<double> row_strengths;
    std::vector<double> col_strengths;
    double total_weight = 0.0;
};

/// A weighted bipartite graph with labelled row (top) and column (bottom) layers.
///
/// Immutable once built. The constructor checks every invariant: unique labels,
/// nonnegative weights, integer weights in discrete mode and at least one
/// strictly positive weight.
class WeightedBipartiteGraph {
public:
    WeightedBipartiteGraph(std::vector<std::string> row_labels,
                           std::vector<std::string> col_labels,
                           Matrix<double> weights,
                           WeightMode mode);

    std::size_t n_rows() const noexcept { return weights_.rows(); }
    std::size_t n_cols() const noexcept { return weights_.cols(); }

    const std::vector<std::string>& row_labels() const noexcept { return row_labels_; }
    const std::vector<std::string>& col_labels() const noexcept { return col_labels_; }
    const Matrix<double>& weights() const noexcept { return weights_; }
    double weight(std::size_t i, std::size_t a) const { return weights_(i, a); }
    WeightMode mode() const noexcept { return mode_; }

    /// Same topology and labels, new weight semantics (re-validated).
    WeightedBipartiteGraph with_mode(WeightMode mode) const;

private:
    std::vector<std::string> row_labels_;
    std::vector<std::string> col_labels_;
    Matrix<double> weights_;
    WeightMode mode_;
};

/// Builds a dense graph from a sparse entry list. Duplicate (row, col) pairs
/// are summed; unreferenced pairs are zero.
WeightedBipartiteGraph build_graph(std::vector<std::string> rows,
                                   std::vector<std::string> cols,
                                   const std::vector<Entry>& entries,
                                   WeightMode mode);

StrengthVectors strengths(const WeightedBipartiteGraph& g);

/// Fraction of ones in a binary matrix.
double connectance(const BinaryMatrix& m);

struct ReducedGraph {
    WeightedBipartiteGraph graph;
    std::vector<std::string> dropped_rows;
    std::vector<std::string> dropped_cols;
};

/// Removes zero-strength rows and columns. Model fitting needs every node to
/// carry positive strength, otherwise its multiplier diverges.
ReducedGraph drop_isolated(const WeightedBipartiteGraph& g);

bool is_integer_weight(double w) noexcept;

}  // namespace biwcm
