#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "biwcm/core.hpp"
#include "support.hpp"

using namespace biwcm;
using biwcm::testing::random_graph;

TEST_CASE("build_graph places entries and zero-fills the rest") {
    const auto g = build_graph({"a", "b"}, {"x", "y"}, {{"a", "x", 2}, {"b", "y", 3}}, WeightMode::discrete);
    CHECK(g.weight(0, 0) == 2);
    CHECK(g.weight(0, 1) == 0);
    CHECK(g.weight(1, 0) == 0);
    CHECK(g.weight(1, 1) == 3);
}

TEST_CASE("build_graph sums duplicate pairs") {
    const auto g = build_graph({"a"}, {"x"}, {{"a", "x", 1}, {"a", "x", 1}}, WeightMode::discrete);
    CHECK(g.weight(0, 0) == 2);
}

TEST_CASE("build_graph rejects bad input") {
    CHECK_THROWS_WITH_AS(build_graph({"a"}, {"x"}, {{"a", "x", -1}}, WeightMode::continuous),
                         doctest::Contains("negative weight"), InputError);
    CHECK_THROWS_WITH_AS(build_graph({"a"}, {"x"}, {{"q", "x", 1}}, WeightMode::continuous),
                         doctest::Contains("'q'"), InputError);
    CHECK_THROWS_WITH_AS(build_graph({"a"}, {"x"}, {{"a", "z", 1}}, WeightMode::continuous),
                         doctest::Contains("'z'"), InputError);
    CHECK_THROWS_WITH_AS(build_graph({"a"}, {"x"}, {{"a", "x", 1.5}}, WeightMode::discrete),
                         doctest::Contains("non-integer"), InputError);
    CHECK_THROWS_AS(build_graph({"a", "a"}, {"x"}, {{"a", "x", 1}}, WeightMode::continuous), InputError);
    CHECK_THROWS_AS(build_graph({"a"}, {"x"}, {}, WeightMode::continuous), InputError);
}

TEST_CASE("strengths are the marginals") {
    SUBCASE("diagonal") {
        const auto s = strengths(biwcm::testing::from_rows({{2, 0}, {0, 3}}));
        CHECK(s.row_strengths == std::vector<double>{2, 3});
        CHECK(s.col_strengths == std::vector<double>{2, 3});
        CHECK(s.total_weight == 5);
    }
    SUBCASE("all ones 2x3") {
        const auto s = strengths(biwcm::testing::from_rows({{1, 1, 1}, {1, 1, 1}}));
        CHECK(s.row_strengths == std::vector<double>{3, 3});
        CHECK(s.col_strengths == std::vector<double>{2, 2, 2});
        CHECK(s.total_weight == 6);
    }
    SUBCASE("isolated row and column") {
        const auto s = strengths(biwcm::testing::from_rows({{0, 0}, {0, 5}}));
        CHECK(s.row_strengths == std::vector<double>{0, 5});
        CHECK(s.col_strengths == std::vector<double>{0, 5});
        CHECK(s.total_weight == 5);
    }
}

TEST_CASE("property: total weight is the exact matrix sum in discrete mode") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto g = random_graph(7, 11, 0.4, 1000, seed);
        const auto s = strengths(g);
        double direct = 0.0;
        for (double w : g.weights().data()) direct += w;
        CHECK(s.total_weight == direct);
        CHECK(std::accumulate(s.col_strengths.begin(), s.col_strengths.end(), 0.0) == s.total_weight);
    }
}

TEST_CASE("property: permuting rows permutes the row strengths identically") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto g = random_graph(6, 9, 0.5, 50, seed);
        std::vector<std::size_t> perm(g.n_rows());
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::mt19937_64 rng(seed);
        std::shuffle(perm.begin(), perm.end(), rng);

        std::vector<std::string> rows;
        std::vector<Entry> entries;
        for (std::size_t k = 0; k < perm.size(); ++k) {
            rows.push_back(g.row_labels()[perm[k]]);
            for (std::size_t a = 0; a < g.n_cols(); ++a) {
                entries.push_back({g.row_labels()[perm[k]], g.col_labels()[a], g.weight(perm[k], a)});
            }
        }
        const auto permuted = build_graph(rows, g.col_labels(), entries, WeightMode::discrete);
        const auto s = strengths(g);
        const auto sp = strengths(permuted);
        for (std::size_t k = 0; k < perm.size(); ++k) CHECK(sp.row_strengths[k] == s.row_strengths[perm[k]]);
        CHECK(sp.col_strengths == s.col_strengths);
    }
}

TEST_CASE("connectance") {
    BinaryMatrix diag(2, 2, 0);
    diag(0, 0) = diag(1, 1) = 1;
    CHECK(connectance(diag) == 0.5);
    CHECK(connectance(BinaryMatrix(3, 3, 0)) == 0.0);
    BinaryMatrix stair(2, 2, 1);
    stair(1, 1) = 0;
    CHECK(connectance(stair) == 0.75);
    CHECK_THROWS_AS(connectance(BinaryMatrix()), InputError);
}

TEST_CASE("drop_isolated removes zero-strength nodes and reports them") {
    const auto g = biwcm::testing::from_rows({{0, 0, 0}, {0, 5, 1}, {0, 2, 0}});
    const auto r = drop_isolated(g);
    CHECK(r.graph.row_labels() == std::vector<std::string>{"r1", "r2"});
    CHECK(r.graph.col_labels() == std::vector<std::string>{"c1", "c2"});
    CHECK(r.dropped_rows == std::vector<std::string>{"r0"});
    CHECK(r.dropped_cols == std::vector<std::string>{"c0"});
    CHECK(r.graph.weight(0, 0) == 5);
    CHECK(r.graph.weight(1, 1) == 0);
}
