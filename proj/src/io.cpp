#include "biwcm/io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

namespace biwcm::io {

namespace {

using nlohmann::json;

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

// Splits one line on `sep`, honouring double quotes ("" escapes a quote).
std::vector<std::string> split_fields(std::string_view line, char sep, std::size_t line_no) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    bool was_quoted = false;
    for (std::size_t k = 0; k < line.size(); ++k) {
        const char ch = line[k];
        if (quoted) {
            if (ch == '"') {
                if (k + 1 < line.size() && line[k + 1] == '"') {
                    cur += '"';
                    ++k;
                } else {
                    quoted = false;
                }
            } else {
                cur += ch;
            }
        } else if (ch == '"' && trim(cur).empty()) {
            cur.clear();
            quoted = true;
            was_quoted = true;
        } else if (ch == sep) {
            fields.emplace_back(was_quoted ? cur : std::string(trim(cur)));
            cur.clear();
            was_quoted = false;
        } else if (!(was_quoted && (ch == ' ' || ch == '\t' || ch == '\r'))) {
            cur += ch;
        }
    }
    if (quoted) throw ParseError("line " + std::to_string(line_no) + ": unterminated quoted field", line_no);
    fields.emplace_back(was_quoted ? cur : std::string(trim(cur)));
    return fields;
}

double parse_number(std::string_view text, std::size_t line_no) {
    const auto t = trim(text);
    double value = 0.0;
    const char* begin = t.data();
    const char* end = t.data() + t.size();
    if (!t.empty() && *begin == '+') ++begin;
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (t.empty() || ec != std::errc{} || ptr != end) {
        throw ParseError("line " + std::to_string(line_no) + ": '" + std::string(t) + "' is not a number", line_no);
    }
    return value;
}

bool is_blank(std::string_view line) { return trim(line).empty(); }

template <class Labels>
std::size_t intern(Labels& labels, std::unordered_map<std::string, std::size_t>& index, const std::string& label) {
    const auto [it, fresh] = index.emplace(label, labels.size());
    if (fresh) labels.push_back(label);
    return it->second;
}

json number_array(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(x);
    return a;
}

}  // namespace

Format detect_format(const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    return (ext == ".tsv" || ext == ".txt") ? Format::dense : Format::edgelist;
}

Format parse_format(std::string_view name) {
    if (name == "edgelist") return Format::edgelist;
    if (name == "dense") return Format::dense;
    throw InputError("unknown input format '" + std::string(name) + "'");
}

LabeledMatrix read_edgelist_matrix(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_blank(line)) continue;
        header = split_fields(line, ',', line_no);
        break;
    }
    if (header.empty()) throw ParseError("empty edge list", 0);
    const bool weighted = header.size() == 3;
    const bool ok = (header.size() == 2 || header.size() == 3) &&
                    ((header[0] == "row" && header[1] == "col") ||
                     (header[0] == "row_label" && header[1] == "col_label")) &&
                    (!weighted || header[2] == "weight");
    if (!ok) {
        throw ParseError("line " + std::to_string(line_no) + ": expected header 'row,col,weight'", line_no);
    }

    std::vector<std::string> rows, cols;
    std::unordered_map<std::string, std::size_t> row_idx, col_idx;
    struct Cell {
        std::size_t r, c;
        double w;
        std::size_t line;
    };
    std::vector<Cell> cells;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_blank(line)) continue;
        const auto f = split_fields(line, ',', line_no);
        if (f.size() != header.size()) {
            throw ParseError("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                                 " fields, found " + std::to_string(f.size()),
                             line_no);
        }
        if (f[0].empty() || f[1].empty()) {
            throw ParseError("line " + std::to_string(line_no) + ": empty label", line_no);
        }
        const double w = weighted ? parse_number(f[2], line_no) : 1.0;
        if (w < 0.0) throw ParseError("line " + std::to_string(line_no) + ": negative weight", line_no);
        cells.push_back({intern(rows, row_idx, f[0]), intern(cols, col_idx, f[1]), w, line_no});
    }

    Matrix<double> weights(rows.size(), cols.size(), 0.0);
    for (const auto& c : cells) weights(c.r, c.c) += c.w;
    return {std::move(rows), std::move(cols), std::move(weights)};
}

LabeledMatrix read_dense_matrix(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_blank(line)) continue;
        header = split_fields(line, '\t', line_no);
        break;
    }
    if (header.size() < 2) throw ParseError("dense matrix needs a header with at least one column label", line_no);
    std::vector<std::string> cols(header.begin() + 1, header.end());
    std::unordered_map<std::string, std::size_t> seen;
    for (const auto& c : cols) {
        if (!seen.emplace(c, 0).second) {
            throw ParseError("line " + std::to_string(line_no) + ": duplicate column label '" + c + "'", line_no);
        }
    }
    seen.clear();

    std::vector<std::string> rows;
    std::vector<double> values;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_blank(line)) continue;
        const auto f = split_fields(line, '\t', line_no);
        if (f.size() != header.size()) {
            throw ParseError("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                                 " fields, found " + std::to_string(f.size()),
                             line_no);
        }
        if (!seen.emplace(f[0], 0).second) {
            throw ParseError("line " + std::to_string(line_no) + ": duplicate row label '" + f[0] + "'", line_no);
        }
        rows.push_back(f[0]);
        for (std::size_t k = 1; k < f.size(); ++k) values.push_back(parse_number(f[k], line_no));
    }
    Matrix<double> weights(rows.size(), cols.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t a = 0; a < cols.size(); ++a) weights(i, a) = values[i * cols.size() + a];
    }
    return {std::move(rows), std::move(cols), std::move(weights)};
}

WeightedBipartiteGraph read_edgelist(std::istream& in, WeightMode mode) {
    auto m = read_edgelist_matrix(in);
    return WeightedBipartiteGraph(std::move(m.rows), std::move(m.cols), std::move(m.values), mode);
}

WeightedBipartiteGraph read_dense(std::istream& in, WeightMode mode) {
    auto m = read_dense_matrix(in);
    return WeightedBipartiteGraph(std::move(m.rows), std::move(m.cols), std::move(m.values), mode);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

LabeledMatrix read_matrix(const std::filesystem::path& path, Format format) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path.string() + "'");
    return format == Format::dense ? read_dense_matrix(in) : read_edgelist_matrix(in);
}

WeightedBipartiteGraph read_graph(const std::filesystem::path& path, Format format, WeightMode mode) {
    auto m = read_matrix(path, format);
    return WeightedBipartiteGraph(std::move(m.rows), std::move(m.cols), std::move(m.values), mode);
}

std::string format_number(double x) {
    if (x == 0.0) return "0";
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    if (ec != std::errc{}) throw Error("number formatting failed");
    return std::string(buf, ptr);
}

std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\n\r") == std::string_view::npos && trim(s) == s) return std::string(s);
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    out += '"';
    return out;
}

std::string edgelist_csv(const std::vector<std::string>& rows, const std::vector<std::string>& cols,
                         const Matrix<double>& weights) {
    std::string out = "row,col,weight\n";
    for (std::size_t i = 0; i < weights.rows(); ++i) {
        for (std::size_t a = 0; a < weights.cols(); ++a) {
            if (weights(i, a) == 0.0) continue;
            out += csv_field(rows[i]) + ',' + csv_field(cols[a]) + ',' + format_number(weights(i, a)) + '\n';
        }
    }
    return out;
}

namespace {

template <class Cell>
std::string dense_tsv_impl(const std::vector<std::string>& rows, const std::vector<std::string>& cols,
                           std::size_t nr, std::size_t nc, Cell cell) {
    std::string out = "label";
    for (const auto& c : cols) out += '\t' + c;
    out += '\n';
    for (std::size_t i = 0; i < nr; ++i) {
        out += rows[i];
        for (std::size_t a = 0; a < nc; ++a) out += '\t' + cell(i, a);
        out += '\n';
    }
    return out;
}

}  // namespace

std::string dense_tsv(const std::vector<std::string>& rows, const std::vector<std::string>& cols,
                      const Matrix<double>& values) {
    return dense_tsv_impl(rows, cols, values.rows(), values.cols(),
                          [&](std::size_t i, std::size_t a) { return format_number(values(i, a)); });
}

std::string dense_tsv(const std::vector<std::string>& rows, const std::vector<std::string>& cols,
                      const BinaryMatrix& values) {
    return dense_tsv_impl(rows, cols, values.rows(), values.cols(),
                          [&](std::size_t i, std::size_t a) { return std::string(values(i, a) ? "1" : "0"); });
}

std::string fitted_model_json(const FittedModel& fm) {
    json j;
    j["model"] = to_string(fm.model);
    j["theta"] = number_array(fm.theta);
    j["eta"] = number_array(fm.eta);
    j["row_labels"] = fm.row_labels;
    j["col_labels"] = fm.col_labels;
    j["row_strengths"] = number_array(fm.strengths.row_strengths);
    j["col_strengths"] = number_array(fm.strengths.col_strengths);
    j["total_weight"] = fm.strengths.total_weight;
    j["residual"] = fm.diagnostics.residual;
    j["iterations"] = fm.diagnostics.iterations;
    j["method"] = to_string(fm.diagnostics.method);
    j["converged"] = fm.diagnostics.converged;
    j["hessian_fallback"] = fm.diagnostics.hessian_fallback;
    j["log_likelihood"] = fm.diagnostics.log_likelihood;
    return j.dump(2) + "\n";
}

FittedModel parse_fitted_model_json(std::string_view text) {
    try {
        const json j = json::parse(text);
        FittedModel fm;
        fm.model = parse_model_kind(j.at("model").get<std::string>());
        fm.theta = j.at("theta").get<std::vector<double>>();
        fm.eta = j.at("eta").get<std::vector<double>>();
        fm.row_labels = j.at("row_labels").get<std::vector<std::string>>();
        fm.col_labels = j.at("col_labels").get<std::vector<std::string>>();
        fm.diagnostics.residual = j.at("residual").get<double>();
        fm.diagnostics.iterations = j.at("iterations").get<int>();
        fm.diagnostics.method = parse_solver_method(j.at("method").get<std::string>());
        fm.diagnostics.converged = j.value("converged", true);
        fm.diagnostics.hessian_fallback = j.value("hessian_fallback", false);
        fm.diagnostics.log_likelihood = j.value("log_likelihood", 0.0);
        if (j.contains("row_strengths")) {
            fm.strengths.row_strengths = j.at("row_strengths").get<std::vector<double>>();
            fm.strengths.col_strengths = j.at("col_strengths").get<std::vector<double>>();
            fm.strengths.total_weight = j.value("total_weight", 0.0);
            if (!j.contains("total_weight")) {
                for (double s : fm.strengths.row_strengths) fm.strengths.total_weight += s;
            }
        } else if (is_merca(fm.model)) {
            throw InputError("MERCA model file needs row_strengths and col_strengths");
        } else {
            // only pair sums are needed for BiWCM models; recover the fitted strengths
            fm.strengths = expected_strengths(fm.model, fm.theta, fm.eta);
        }

        if (fm.strengths.row_strengths.size() != fm.row_labels.size() ||
            fm.strengths.col_strengths.size() != fm.col_labels.size()) {
            throw InputError("model file: strength vectors do not match the labels");
        }
        if (!is_merca(fm.model)) {
            if (fm.theta.size() != fm.row_labels.size() || fm.eta.size() != fm.col_labels.size()) {
                throw InputError("model file: multiplier vectors do not match the labels");
            }
            if (!is_feasible(fm.theta, fm.eta)) throw InputError("model file: some theta_i + eta_a <= 0");
        }
        return fm;
    } catch (const json::exception& e) {
        throw InputError(std::string("invalid model file: ") + e.what());
    }
}

std::string pvalue_csv(const PValueMatrix& pm, const Matrix<double>& weights, bool full_matrix) {
    std::string out = "row_label,col_label,weight,pvalue,log_pvalue\n";
    for (std::size_t i = 0; i < weights.rows(); ++i) {
        for (std::size_t a = 0; a < weights.cols(); ++a) {
            if (!full_matrix && weights(i, a) == 0.0) continue;
            out += csv_field(pm.row_labels[i]) + ',' + csv_field(pm.col_labels[a]) + ',' +
                   format_number(weights(i, a)) + ',' + format_number(pm.values(i, a)) + ',' +
                   format_number(pm.log_values(i, a)) + '\n';
        }
    }
    return out;
}

std::string validated_edges_csv(const ValidatedMatrix& v) {
    std::string out = "row_label,col_label\n";
    for (std::size_t i = 0; i < v.matrix.rows(); ++i) {
        for (std::size_t a = 0; a < v.matrix.cols(); ++a) {
            if (v.matrix(i, a)) out += csv_field(v.row_labels[i]) + ',' + csv_field(v.col_labels[a]) + '\n';
        }
    }
    return out;
}

std::string validated_metadata_json(const ValidatedMatrix& v) {
    json j;
    j["procedure"] = to_string(v.procedure);
    j["model"] = to_string(v.model);
    j["alpha"] = v.alpha_level ? json(*v.alpha_level) : json(nullptr);
    j["fdr_threshold"] = v.fdr_threshold ? json(*v.fdr_threshold) : json(nullptr);
    j["n_tests"] = v.n_tests;
    j["n_tests_counts"] = "all_cells";
    j["n_validated"] = v.n_validated();
    j["connectance"] = connectance(v.matrix);
    j["n_rows"] = v.matrix.rows();
    j["n_cols"] = v.matrix.cols();
    return j.dump(2) + "\n";
}

std::string ranking_csv(const std::vector<std::string>& labels, std::span<const double> scores) {
    std::string out = "label,score,rank\n";
    const auto order = descending_order(scores);
    for (std::size_t k = 0; k < order.size(); ++k) {
        out += csv_field(labels[order[k]]) + ',' + format_number(scores[order[k]]) + ',' + std::to_string(k + 1) + '\n';
    }
    return out;
}

}  // namespace biwcm::io
