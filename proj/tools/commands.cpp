#include "commands.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "biwcm/metrics.hpp"
#include "biwcm/nullmodels.hpp"
#include "biwcm/sampling.hpp"

namespace biwcm::cli {

namespace fs = std::filesystem;
using nlohmann::json;

void RunConfig::validate() const {
    for (const auto& p : inputs) {
        if (!fs::exists(p)) throw InputError("input '" + p.string() + "' does not exist");
    }
    if (!(alpha > 0.0 && alpha <= 1.0)) throw InputError("--alpha must lie in (0, 1]");
    solver.validate();
    if (fc_max_iterations < 1) throw InputError("--max-iter must be at least 1");
    if (!(fc_tolerance > 0.0)) throw InputError("--tol must be positive");
}

void OutputSet::add(std::string name, std::string content) {
    files_.emplace_back(std::move(name), std::move(content));
}

void OutputSet::commit(const fs::path& dir) const {
    if (files_.empty()) return;
    fs::create_directories(dir);
    std::vector<std::pair<fs::path, fs::path>> staged;
    for (const auto& [name, content] : files_) {
        const fs::path final_path = dir / name;
        fs::path tmp = final_path;
        tmp += ".partial";
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << content;
        out.close();
        if (!out) {
            for (const auto& s : staged) fs::remove(s.first);
            fs::remove(tmp);
            throw Error("cannot write '" + final_path.string() + "'");
        }
        staged.emplace_back(tmp, final_path);
    }
    for (const auto& [tmp, final_path] : staged) fs::rename(tmp, final_path);
}

namespace {

const fs::path& single_input(const RunConfig& cfg) {
    if (cfg.inputs.size() != 1) throw InputError("expected exactly one --input");
    return cfg.inputs.front();
}

io::Format format_of(const RunConfig& cfg, const fs::path& p) {
    return cfg.format.value_or(io::detect_format(p));
}

WeightedBipartiteGraph load_graph(const RunConfig& cfg) {
    const auto& p = single_input(cfg);
    const WeightMode mode = is_discrete(cfg.model) ? WeightMode::discrete : WeightMode::continuous;
    return io::read_graph(p, format_of(cfg, p), mode);
}

struct Fit {
    FittedModel model;
    std::vector<std::string> dropped_rows;
    std::vector<std::string> dropped_cols;
};

Fit fit_model(const RunConfig& cfg, const WeightedBipartiteGraph& g, std::ostream& log) {
    if (is_merca(cfg.model)) return {fit_merca(g, cfg.model), {}, {}};
    auto reduced = drop_isolated(g);
    auto fm = solve(reduced.graph, cfg.model, cfg.solver);
    log << to_string(fm.model) << ": " << to_string(fm.diagnostics.method) << " converged in "
        << fm.diagnostics.iterations << " iterations (residual " << fm.diagnostics.residual << ", "
        << fm.diagnostics.wall_time_seconds << " s)\n";
    return {std::move(fm), std::move(reduced.dropped_rows), std::move(reduced.dropped_cols)};
}

std::string join(const std::vector<std::string>& v) {
    std::string out;
    for (std::size_t k = 0; k < v.size(); ++k) out += (k ? ", " : "") + v[k];
    return out;
}

std::string fit_report(const Fit& f) {
    const auto& fm = f.model;
    std::ostringstream r;
    r << "model: " << to_string(fm.model) << '\n'
      << "method: " << to_string(fm.diagnostics.method) << '\n'
      << "rows: " << fm.n_rows() << '\n'
      << "columns: " << fm.n_cols() << '\n'
      << "dropped rows (" << f.dropped_rows.size() << "): " << join(f.dropped_rows) << '\n'
      << "dropped columns (" << f.dropped_cols.size() << "): " << join(f.dropped_cols) << '\n'
      << "iterations: " << fm.diagnostics.iterations << '\n'
      << "residual: " << io::format_number(fm.diagnostics.residual) << '\n'
      << "converged: " << (fm.diagnostics.converged ? "true" : "false") << '\n'
      << "hessian fallback: " << (fm.diagnostics.hessian_fallback ? "true" : "false") << '\n';
    return r.str();
}

std::vector<std::string> pick(const std::vector<std::string>& labels, const std::vector<std::size_t>& idx) {
    std::vector<std::string> out;
    out.reserve(idx.size());
    for (auto k : idx) out.push_back(labels[k]);
    return out;
}

json ranking_diagnostics(const RankingResult& r, const std::vector<std::string>& rows,
                         const std::vector<std::string>& cols) {
    json j;
    j["iterations"] = r.iterations;
    j["converged"] = r.converged;
    j["max_relative_change"] = r.max_relative_change;
    j["dropped_rows"] = pick(rows, r.dropped_rows);
    j["dropped_cols"] = pick(cols, r.dropped_cols);
    return j;
}

FitnessComplexityConfig fc_config(const RunConfig& cfg) {
    return {cfg.fc_max_iterations, cfg.fc_tolerance};
}

json nullable(std::optional<double> v) { return v ? json(*v) : json(nullptr); }

std::optional<double> maybe_spearman(const std::vector<double>& x, const std::vector<double>& y) {
    try {
        return spearman(x, y);
    } catch (const InputError&) {
        return std::nullopt;
    }
}

// Display order for one layer: kept entries by decreasing score, then dropped ones.
std::vector<std::size_t> display_order(const std::vector<double>& scores, const std::vector<std::size_t>& kept,
                                       const std::vector<std::size_t>& dropped) {
    std::vector<std::size_t> order;
    for (auto k : descending_order(scores)) order.push_back(kept[k]);
    order.insert(order.end(), dropped.begin(), dropped.end());
    return order;
}

}  // namespace

OutputSet cmd_fit(const RunConfig& cfg, std::ostream& log) {
    const auto g = load_graph(cfg);
    const auto f = fit_model(cfg, g, log);
    OutputSet out;
    out.add("model.json", io::fitted_model_json(f.model));
    out.add("fit_report.txt", fit_report(f));
    return out;
}

OutputSet cmd_validate(const RunConfig& cfg, std::ostream& log) {
    const auto g = load_graph(cfg);
    const auto f = fit_model(cfg, g, log);
    OutputSet out;
    ValidatedMatrix v;
    if (cfg.procedure == Procedure::mu) {
        v = mu_validate(g, f.model);
    } else {
        const auto pm = pvalue_matrix(f.model, g);
        v = alpha_validate(g, pm, cfg.alpha);
        out.add("pvalues.csv", io::pvalue_csv(pm, g.weights(), cfg.full_matrix));
    }
    out.add("validated_edges.csv", io::validated_edges_csv(v));
    out.add("validated_metadata.json", io::validated_metadata_json(v));
    out.add("validated_matrix.tsv", io::dense_tsv(v.row_labels, v.col_labels, v.matrix));
    log << "validated " << v.n_validated() << " of " << v.matrix.size() << " links\n";
    return out;
}

OutputSet cmd_rank(const RunConfig& cfg, std::ostream& log) {
    const auto& p = single_input(cfg);
    const auto m = io::read_matrix(p, format_of(cfg, p));
    const auto r = fitness_complexity(m.values, fc_config(cfg));
    if (!r.converged) log << "fitness-complexity did not converge in " << r.iterations << " iterations\n";
    OutputSet out;
    out.add("fitness.csv", io::ranking_csv(pick(m.rows, r.kept_rows), r.fitness));
    out.add("complexity.csv", io::ranking_csv(pick(m.cols, r.kept_cols), r.complexity));
    out.add("ranking_diagnostics.json", ranking_diagnostics(r, m.rows, m.cols).dump(2) + "\n");
    return out;
}

OutputSet cmd_compare(const RunConfig& cfg, std::ostream& log) {
    if (cfg.inputs.size() < 2) throw InputError("compare needs at least two --input matrices");

    struct Item {
        std::string name;
        io::LabeledMatrix labelled;
        BinaryMatrix binary;
        std::optional<RankingResult> ranking;  // empty for an all-zero matrix
    };
    std::vector<Item> items;
    for (const auto& p : cfg.inputs) items.push_back({p.string(), io::read_matrix(p, format_of(cfg, p)), {}, {}});

    // Every matrix is laid out in the label order of the first one.
    const auto& ref = items.front().labelled;
    const std::set<std::string> ref_rows(ref.rows.begin(), ref.rows.end());
    const std::set<std::string> ref_cols(ref.cols.begin(), ref.cols.end());
    for (auto& it : items) {
        const std::set<std::string> rows(it.labelled.rows.begin(), it.labelled.rows.end());
        const std::set<std::string> cols(it.labelled.cols.begin(), it.labelled.cols.end());
        if (rows != ref_rows || cols != ref_cols) {
            std::vector<std::string> diff;
            for (const auto& [a, b, what] : {std::tuple{&ref_rows, &rows, "row"}, std::tuple{&ref_cols, &cols, "column"}}) {
                for (const auto& l : *a) {
                    if (!b->count(l)) diff.push_back(std::string(what) + " '" + l + "' missing from " + it.name);
                }
                for (const auto& l : *b) {
                    if (!a->count(l)) diff.push_back(std::string(what) + " '" + l + "' only in " + it.name);
                }
            }
            throw InputError("label sets differ: " + join(diff));
        }
        std::map<std::string, std::size_t> ri, ci;
        for (std::size_t k = 0; k < it.labelled.rows.size(); ++k) ri[it.labelled.rows[k]] = k;
        for (std::size_t k = 0; k < it.labelled.cols.size(); ++k) ci[it.labelled.cols[k]] = k;
        it.binary = BinaryMatrix(ref.rows.size(), ref.cols.size(), 0);
        for (std::size_t i = 0; i < ref.rows.size(); ++i) {
            for (std::size_t a = 0; a < ref.cols.size(); ++a) {
                const double v = it.labelled.values(ri[ref.rows[i]], ci[ref.cols[a]]);
                if (!(v >= 0.0)) throw InputError(it.name + ": negative entry");
                it.binary(i, a) = v > 0.0 ? 1 : 0;
            }
        }
        if (std::find(it.binary.data().begin(), it.binary.data().end(), std::uint8_t{1}) != it.binary.data().end()) {
            it.ranking = fitness_complexity(it.binary, fc_config(cfg));
        }
    }

    json report;
    report["n_rows"] = ref.rows.size();
    report["n_cols"] = ref.cols.size();
    report["matrices"] = json::array();
    for (const auto& it : items) {
        json m;
        m["name"] = it.name;
        m["n_links"] = std::count(it.binary.data().begin(), it.binary.data().end(), std::uint8_t{1});
        m["connectance"] = connectance(it.binary);
        m["snodf"] = snodf(it.binary, NodfVariant::stable);
        m["snodf_classic"] = snodf(it.binary, NodfVariant::classic);
        m["empty_rows"] = it.ranking ? it.ranking->dropped_rows.size() : ref.rows.size();
        m["empty_cols"] = it.ranking ? it.ranking->dropped_cols.size() : ref.cols.size();
        m["fitness_complexity"] = it.ranking ? ranking_diagnostics(*it.ranking, ref.rows, ref.cols) : json(nullptr);
        report["matrices"].push_back(m);
    }

    // Scores of the nodes kept by both rankings, in input-index order.
    auto common_scores = [](const std::optional<RankingResult>& ox, const std::optional<RankingResult>& oy, bool rows) {
        std::pair<std::vector<double>, std::vector<double>> out;
        if (!ox || !oy) return out;
        const auto& x = *ox;
        const auto& y = *oy;
        const auto& kx = rows ? x.kept_rows : x.kept_cols;
        const auto& ky = rows ? y.kept_rows : y.kept_cols;
        const auto& sx = rows ? x.fitness : x.complexity;
        const auto& sy = rows ? y.fitness : y.complexity;
        std::map<std::size_t, double> in_y;
        for (std::size_t k = 0; k < ky.size(); ++k) in_y[ky[k]] = sy[k];
        for (std::size_t k = 0; k < kx.size(); ++k) {
            if (const auto f = in_y.find(kx[k]); f != in_y.end()) {
                out.first.push_back(sx[k]);
                out.second.push_back(f->second);
            }
        }
        return out;
    };

    const std::size_t n = items.size();
    json fitness_grid = json::array(), complexity_grid = json::array(), pairs = json::array();
    for (std::size_t x = 0; x < n; ++x) {
        json frow = json::array(), crow = json::array();
        for (std::size_t y = 0; y < n; ++y) {
            const auto [fx, fy] = common_scores(items[x].ranking, items[y].ranking, true);
            const auto [cx, cy] = common_scores(items[x].ranking, items[y].ranking, false);
            const auto sf = maybe_spearman(fx, fy);
            const auto sc = maybe_spearman(cx, cy);
            frow.push_back(nullable(sf));
            crow.push_back(nullable(sc));
            if (y <= x) continue;

            std::size_t both = 0, only_x = 0, only_y = 0;
            for (std::size_t k = 0; k < items[x].binary.size(); ++k) {
                const bool in_x = items[x].binary.data()[k] != 0;
                const bool in_y = items[y].binary.data()[k] != 0;
                both += in_x && in_y;
                only_x += in_x && !in_y;
                only_y += !in_x && in_y;
            }
            const auto frac = [](std::size_t num, std::size_t den) {
                return den == 0 ? std::optional<double>{} : std::optional<double>(double(num) / double(den));
            };
            json pr;
            pr["a"] = items[x].name;
            pr["b"] = items[y].name;
            pr["overlap"] = both;
            pr["only_a"] = only_x;
            pr["only_b"] = only_y;
            pr["overlap_fraction_of_a"] = nullable(frac(both, both + only_x));
            pr["overlap_fraction_of_b"] = nullable(frac(both, both + only_y));
            pr["jaccard"] = nullable(frac(both, both + only_x + only_y));
            pr["spearman_fitness"] = nullable(sf);
            pr["spearman_complexity"] = nullable(sc);
            pr["common_rows"] = fx.size();
            pr["common_cols"] = cx.size();
            pairs.push_back(pr);
        }
        fitness_grid.push_back(frow);
        complexity_grid.push_back(crow);
    }
    report["pairs"] = pairs;
    report["spearman_fitness_grid"] = fitness_grid;
    report["spearman_complexity_grid"] = complexity_grid;

    log << "compared " << n << " matrices\n";
    OutputSet out;
    out.add("comparison.json", report.dump(2) + "\n");
    return out;
}

OutputSet cmd_filter(const RunConfig& cfg, std::ostream& log) {
    const auto g = load_graph(cfg);
    const auto f = fit_model(cfg, g, log);
    const auto pm = pvalue_matrix(f.model, g);
    const auto expected = expected_weight_matrix(f.model, g);

    Matrix<double> signal(g.n_rows(), g.n_cols()), log_ratio(g.n_rows(), g.n_cols());
    for (std::size_t i = 0; i < g.n_rows(); ++i) {
        for (std::size_t a = 0; a < g.n_cols(); ++a) {
            signal(i, a) = -std::expm1(pm.log_values(i, a));
            log_ratio(i, a) = std::log1p(g.weight(i, a)) - std::log1p(expected(i, a));
        }
    }

    const auto r = fitness_complexity(signal, fc_config(cfg));
    if (!r.converged) log << "fitness-complexity did not converge in " << r.iterations << " iterations\n";
    const auto row_order = display_order(r.fitness, r.kept_rows, r.dropped_rows);
    const auto col_order = display_order(r.complexity, r.kept_cols, r.dropped_cols);

    std::string csv = "row_label,col_label,weight,expected_weight,one_minus_pvalue,log_ratio\n";
    std::vector<std::string> rows, cols;
    for (auto i : row_order) rows.push_back(g.row_labels()[i]);
    for (auto a : col_order) cols.push_back(g.col_labels()[a]);
    Matrix<double> signal_sorted(g.n_rows(), g.n_cols()), ratio_sorted(g.n_rows(), g.n_cols());
    for (std::size_t ri = 0; ri < row_order.size(); ++ri) {
        for (std::size_t ci = 0; ci < col_order.size(); ++ci) {
            const auto i = row_order[ri];
            const auto a = col_order[ci];
            signal_sorted(ri, ci) = signal(i, a);
            ratio_sorted(ri, ci) = log_ratio(i, a);
            csv += io::csv_field(rows[ri]) + ',' + io::csv_field(cols[ci]) + ',' + io::format_number(g.weight(i, a)) +
                   ',' + io::format_number(expected(i, a)) + ',' + io::format_number(signal(i, a)) + ',' +
                   io::format_number(log_ratio(i, a)) + '\n';
        }
    }

    OutputSet out;
    out.add("filter.csv", csv);
    out.add("one_minus_pvalue.tsv", io::dense_tsv(rows, cols, signal_sorted));
    out.add("log_ratio.tsv", io::dense_tsv(rows, cols, ratio_sorted));
    out.add("filter_ranking.json", ranking_diagnostics(r, g.row_labels(), g.col_labels()).dump(2) + "\n");
    return out;
}

OutputSet cmd_sample(const RunConfig& cfg, std::ostream& log) {
    const auto fm = io::parse_fitted_model_json(io::read_file(single_input(cfg)));
    OutputSet out;
    for (std::size_t k = 0; k < cfg.n_samples; ++k) {
        const auto s = sample(fm, cfg.seed, k);
        std::ostringstream name;
        name << "sample_" << std::setw(6) << std::setfill('0') << k << ".csv";
        out.add(name.str(), io::edgelist_csv(fm.row_labels, fm.col_labels, s.weights));
    }
    log << "drew " << cfg.n_samples << " samples from " << to_string(fm.model) << " (seed " << cfg.seed << ")\n";
    return out;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Maximum-entropy null models for weighted bipartite networks"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::vector<std::string> inputs;
    std::string format, model = "biwcm_c", procedure = "mu", method;
    double tol = -1.0;
    int max_iter = -1;

    auto add_input = [&](CLI::App* sub, bool many) {
        auto* opt = sub->add_option("--input", inputs, many ? "input matrices (repeat)" : "input file")->required();
        if (!many) opt->expected(1);
        sub->add_option("--format", format, "input format")->check(CLI::IsMember({"edgelist", "dense"}));
        sub->add_option("--out", cfg.out_dir, "output directory");
    };
    auto add_model = [&](CLI::App* sub) {
        sub->add_option("--model", model, "null model")
            ->check(CLI::IsMember({"biwcm_d", "biwcm_c", "merca_d", "merca_c"}));
        sub->add_option("--method", method, "solver method")
            ->check(CLI::IsMember({"fixed_point", "newton", "quasi_newton"}));
        sub->add_option("--tol", tol, "solver tolerance on the max relative strength error");
        sub->add_option("--max-iter", max_iter, "solver iteration budget");
    };
    auto add_fc = [&](CLI::App* sub) {
        sub->add_option("--tol", tol, "fitness-complexity tolerance on the max relative change");
        sub->add_option("--max-iter", max_iter, "fitness-complexity iteration budget");
    };

    auto* fit = app.add_subcommand("fit", "fit a null model and write its multipliers");
    add_input(fit, false);
    add_model(fit);

    auto* validate = app.add_subcommand("validate", "binarize a weighted network by mu- or alpha-validation");
    add_input(validate, false);
    add_model(validate);
    validate->add_option("--procedure", procedure, "validation procedure")->check(CLI::IsMember({"mu", "alpha"}));
    validate->add_option("--alpha", cfg.alpha, "FDR level for the alpha procedure");
    validate->add_flag("--full-matrix", cfg.full_matrix, "write p-values for every cell, not only nonzero weights");

    auto* rank = app.add_subcommand("rank", "Fitness-Complexity ranking of a matrix");
    add_input(rank, false);
    add_fc(rank);

    auto* compare = app.add_subcommand("compare", "overlap, nestedness and rank correlations of matrices");
    add_input(compare, true);
    add_fc(compare);

    auto* filter = app.add_subcommand("filter", "1 - p-value and log((1+w)/(1+<w>)) per link, FC-ordered");
    add_input(filter, false);
    add_model(filter);

    auto* sampler = app.add_subcommand("sample", "draw graphs from a fitted model file");
    add_input(sampler, false);
    sampler->add_option("--n", cfg.n_samples, "number of samples");
    sampler->add_option("--seed", cfg.seed, "random seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        for (const auto& p : inputs) cfg.inputs.emplace_back(p);
        if (!format.empty()) cfg.format = io::parse_format(format);
        cfg.model = parse_model_kind(model);
        cfg.procedure = parse_procedure(procedure);
        if (!method.empty()) cfg.solver.method = parse_solver_method(method);
        const bool fc_command = rank->parsed() || compare->parsed();
        if (tol > 0.0) (fc_command ? cfg.fc_tolerance : cfg.solver.tolerance) = tol;
        else if (tol != -1.0) throw InputError("--tol must be positive");
        if (max_iter >= 1) (fc_command ? cfg.fc_max_iterations : cfg.solver.max_iterations) = max_iter;
        else if (max_iter != -1) throw InputError("--max-iter must be at least 1");
        cfg.validate();

        OutputSet files;
        if (fit->parsed()) files = cmd_fit(cfg, err);
        else if (validate->parsed()) files = cmd_validate(cfg, err);
        else if (rank->parsed()) files = cmd_rank(cfg, err);
        else if (compare->parsed()) files = cmd_compare(cfg, err);
        else if (filter->parsed()) files = cmd_filter(cfg, err);
        else files = cmd_sample(cfg, err);
        files.commit(cfg.out_dir);
        for (const auto& [name, content] : files.files()) out << (cfg.out_dir / name).string() << '\n';
        return kOk;
    } catch (const ConvergenceError& e) {
        err << "error: " << e.what() << '\n';
        return kNotConverged;
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kFailure;
    }
}

}  // namespace biwcm::cli
