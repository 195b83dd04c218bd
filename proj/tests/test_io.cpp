#include <doctest.h>

#include <sstream>

#include <json.hpp>

#include "biwcm/io.hpp"
#include "biwcm/validation.hpp"
#include "support.hpp"

using namespace biwcm;
using biwcm::testing::from_rows;
using biwcm::testing::random_graph;

TEST_CASE("edge-list reading") {
    SUBCASE("labels in order of appearance, duplicates summed") {
        std::istringstream in("row,col,weight\nb,x,2\na,y,1\nb,x,3\n");
        const auto g = io::read_edgelist(in, WeightMode::discrete);
        CHECK(g.row_labels() == std::vector<std::string>{"b", "a"});
        CHECK(g.col_labels() == std::vector<std::string>{"x", "y"});
        CHECK(g.weight(0, 0) == 5);
        CHECK(g.weight(1, 1) == 1);
        CHECK(g.weight(0, 1) == 0);
    }
    SUBCASE("missing weight column means 1, quoted labels") {
        std::istringstream in("row_label,col_label\n\"a,1\",x\nb,x\n");
        const auto g = io::read_edgelist(in, WeightMode::discrete);
        CHECK(g.row_labels().front() == "a,1");
        CHECK(g.weight(1, 0) == 1);
    }
    SUBCASE("malformed rows name the line") {
        std::istringstream in("row,col,weight\na,x,1\na,y\n");
        try {
            io::read_edgelist(in, WeightMode::continuous);
            FAIL("expected ParseError");
        } catch (const io::ParseError& e) {
            CHECK(e.line() == 3);
            CHECK(std::string(e.what()).find("line 3") != std::string::npos);
        }
        std::istringstream bad("row,col,weight\na,x,abc\n");
        CHECK_THROWS_AS(io::read_edgelist(bad, WeightMode::continuous), io::ParseError);
        std::istringstream header("foo,bar,baz\na,x,1\n");
        CHECK_THROWS_AS(io::read_edgelist(header, WeightMode::continuous), io::ParseError);
    }
    SUBCASE("non-integer weight in discrete mode names the cell") {
        std::istringstream in("row,col,weight\na,x,1.5\n");
        CHECK_THROWS_WITH_AS(io::read_edgelist(in, WeightMode::discrete), doctest::Contains("(a, x)"), InputError);
    }
}

TEST_CASE("dense reading") {
    std::istringstream in("label\tx\ty\na\t1\t0\nb\t0\t2.5\n");
    const auto g = io::read_dense(in, WeightMode::continuous);
    CHECK(g.row_labels() == std::vector<std::string>{"a", "b"});
    CHECK(g.col_labels() == std::vector<std::string>{"x", "y"});
    CHECK(g.weight(1, 1) == 2.5);

    std::istringstream ragged("label\tx\ty\na\t1\n");
    CHECK_THROWS_AS(io::read_dense(ragged, WeightMode::continuous), io::ParseError);
    std::istringstream dup("label\tx\tx\na\t1\t1\n");
    CHECK_THROWS_AS(io::read_dense(dup, WeightMode::continuous), InputError);
    std::istringstream zeros("label\tx\na\t0\n");
    CHECK(io::read_dense_matrix(zeros).values(0, 0) == 0.0);
}

TEST_CASE("format detection") {
    CHECK(io::detect_format("m.tsv") == io::Format::dense);
    CHECK(io::detect_format("m.txt") == io::Format::dense);
    CHECK(io::detect_format("m.csv") == io::Format::edgelist);
    CHECK(io::parse_format("dense") == io::Format::dense);
    CHECK_THROWS_AS(io::parse_format("xml"), InputError);
}

TEST_CASE("numbers round-trip through their text form") {
    for (double x : {0.1, 1.0 / 3, 2.0 / 3, 1e-300, 123456789.125, 0.0, 5.0}) {
        CHECK(std::stod(io::format_number(x)) == x);
    }
    CHECK(io::format_number(5.0) == "5");
    CHECK(io::csv_field("a,b") == "\"a,b\"");
    CHECK(io::csv_field("plain") == "plain");
}

TEST_CASE("edge-list and dense writers read back") {
    const auto g = random_graph(4, 5, 0.5, 9, 3);
    std::istringstream e(io::edgelist_csv(g.row_labels(), g.col_labels(), g.weights()));
    const auto back = io::read_edgelist(e, WeightMode::discrete);
    for (std::size_t i = 0; i < back.n_rows(); ++i) {
        for (std::size_t a = 0; a < back.n_cols(); ++a) {
            const auto r = std::find(g.row_labels().begin(), g.row_labels().end(), back.row_labels()[i]) - g.row_labels().begin();
            const auto c = std::find(g.col_labels().begin(), g.col_labels().end(), back.col_labels()[a]) - g.col_labels().begin();
            CHECK(back.weight(i, a) == g.weight(r, c));
        }
    }
    std::istringstream d(io::dense_tsv(g.row_labels(), g.col_labels(), g.weights()));
    CHECK(io::read_dense(d, WeightMode::discrete).weights() == g.weights());
}

TEST_CASE("fitted model JSON round-trip") {
    const auto g = random_graph(5, 6, 0.5, 20, 8);
    for (auto kind : {ModelKind::biwcm_d, ModelKind::biwcm_c, ModelKind::merca_d, ModelKind::merca_c}) {
        const auto fm = fit(g, kind);
        const auto text = io::fitted_model_json(fm);
        const auto back = io::parse_fitted_model_json(text);
        CHECK(back.model == fm.model);
        CHECK(back.theta == fm.theta);
        CHECK(back.eta == fm.eta);
        CHECK(back.row_labels == fm.row_labels);
        CHECK(back.strengths.row_strengths == fm.strengths.row_strengths);
        CHECK(back.strengths.total_weight == fm.strengths.total_weight);
        CHECK(io::fitted_model_json(back) == text);
        const auto j = nlohmann::json::parse(text);
        CHECK(j["model"] == to_string(kind));
    }
    CHECK_THROWS_AS(io::parse_fitted_model_json("{"), InputError);
    CHECK_THROWS_AS(io::parse_fitted_model_json(R"({"model":"biwcm_c"})"), InputError);
}

TEST_CASE("validated outputs") {
    const auto g = from_rows({{0, 2}, {3, 0}});
    const auto v = mu_validate(g, fit_merca(g, ModelKind::merca_c));
    CHECK(io::validated_edges_csv(v) == "row_label,col_label\nr0,c1\nr1,c0\n");
    const auto meta = nlohmann::json::parse(io::validated_metadata_json(v));
    CHECK(meta["procedure"] == "mu");
    CHECK(meta["n_validated"] == 2);
    CHECK(meta["connectance"] == 0.5);
}

TEST_CASE("ranking CSV") {
    const std::vector<std::string> labels{"a", "b", "c"};
    const std::vector<double> scores{0.5, 2.0, 0.5};
    CHECK(io::ranking_csv(labels, scores) == "label,score,rank\nb,2,1\na,0.5,2\nc,0.5,3\n");
}
