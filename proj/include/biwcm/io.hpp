#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "biwcm/core.hpp"
#include "biwcm/metrics.hpp"
#include "biwcm/nullmodels.hpp"
#include "biwcm/solvers.hpp"
#include "biwcm/validation.hpp"

namespace biwcm::io {

/// Input that cannot be parsed; `line` is 1-based (0 when not line-specific).
class ParseError : public InputError {
public:
    ParseError(const std::string& what, std::size_t line) : InputError(what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

enum class Format { edgelist, dense };

/// `.tsv` and `.txt` files are dense, everything else an edge list.
Format detect_format(const std::filesystem::path& path);
Format parse_format(std::string_view name);

/// Labelled matrix as read from disk, before graph invariants are applied
/// (it may be all zero).
struct LabeledMatrix {
    std::vector<std::string> rows;
    std::vector<std::string> cols;
    Matrix<double> values;
};

LabeledMatrix read_edgelist_matrix(std::istream& in);
LabeledMatrix read_dense_matrix(std::istream& in);
LabeledMatrix read_matrix(const std::filesystem::path& path, Format format);

/// Edge-list CSV with header `row,col,weight` (or `row_label,col_label[,weight]`;
/// a missing weight column means weight 1). Labels are ordered by first
/// appearance; duplicate pairs are summed.
WeightedBipartiteGraph read_edgelist(std::istream& in, WeightMode mode);

/// Dense TSV: header row holds a corner cell then the column labels; each
/// following line holds a row label then one value per column.
WeightedBipartiteGraph read_dense(std::istream& in, WeightMode mode);

WeightedBipartiteGraph read_graph(const std::filesystem::path& path, Format format, WeightMode mode);

/// %.17g: shortest form that still round-trips any double.
std::string format_number(double x);

/// Quotes a CSV field when it contains a comma, quote or newline.
std::string csv_field(std::string_view s);

/// `row,col,weight` for every nonzero entry, row-major.
std::string edgelist_csv(const std::vector<std::string>& rows, const std::vector<std::string>& cols,
                         const Matrix<double>& weights);

std::string dense_tsv(const std::vector<std::string>& rows, const std::vector<std::string>& cols,
                      const Matrix<double>& values);
std::string dense_tsv(const std::vector<std::string>& rows, const std::vector<std::string>& cols,
                      const BinaryMatrix& values);

std::string fitted_model_json(const FittedModel& fm);
FittedModel parse_fitted_model_json(std::string_view text);

/// `row_label,col_label,weight,pvalue,log_pvalue` for nonzero weights, or every
/// cell when `full_matrix` is set.
std::string pvalue_csv(const PValueMatrix& pm, const Matrix<double>& weights, bool full_matrix);

/// `row_label,col_label` for every validated link.
std::string validated_edges_csv(const ValidatedMatrix& v);
std::string validated_metadata_json(const ValidatedMatrix& v);

/// `label,score,rank` sorted by rank.
std::string ranking_csv(const std::vector<std::string>& labels, std::span<const double> scores);

std::string read_file(const std::filesystem::path& path);

}  // namespace biwcm::io
