#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <map>

#include "modelsearch/error.hpp"
#include "modelsearch/integration.hpp"
#include "modelsearch/synthetic.hpp"

using namespace modelsearch;

namespace {

EvidenceTable table(std::string id, std::vector<std::string> headers, std::vector<std::vector<std::string>> rows)
{
    EvidenceTable t;
    t.id = std::move(id);
    t.headers = std::move(headers);
    for (auto& r : rows) {
        std::vector<Cell> cells;
        for (auto& v : r) {
            cells.push_back(Cell::parse(v));
        }
        t.rows.push_back(std::move(cells));
    }
    t.card_ids = {"c"};
    return t;
}

std::vector<std::vector<std::string>> grid(const IntegratedTable& t)
{
    std::vector<std::vector<std::string>> out;
    for (const auto& r : t.rows) {
        std::vector<std::string> row;
        for (const auto& c : r) {
            row.push_back(c.is_null() ? "<null>" : c.str());
        }
        out.push_back(std::move(row));
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::multiset<std::string> cells_of(const std::vector<std::vector<Cell>>& rows)
{
    std::multiset<std::string> out;
    for (const auto& r : rows) {
        for (const auto& c : r) {
            if (!c.is_null()) {
                out.insert(c.str());
            }
        }
    }
    return out;
}

OverlapMatrix m(std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t d)
{
    OverlapMatrix x;
    x << a, b, c, d;
    return x;
}

}  // namespace

TEST_CASE("overlap matrix")
{
    auto q = table("q", {"model", "accuracy", "f1 score"}, {{"llama 7b", "1", "2"}, {"qwen", "3", "4"}});
    SUBCASE("self overlap counts header and first-column tokens")
    {
        auto x = overlap_matrix(q, q);
        CHECK(x(0, 0) == 3);  // accuracy, f1, score; the corner header is not on the header axis
        CHECK(x(1, 1) == 3);  // llama, 7b, qwen
    }
    SUBCASE("token-disjoint tables")
    {
        auto other = table("o", {"name", "bleu"}, {{"t5", "1"}});
        CHECK(overlap_matrix(q, other) == OverlapMatrix::Zero());
    }
    SUBCASE("transposed twin puts the header tokens in the first column")
    {
        auto t = table("t", {"model", "accuracy"}, {{"llama", "80"}});
        auto x = overlap_matrix(t, transpose(t));
        CHECK(x(0, 0) == 0);
        CHECK(x(0, 1) == 1);
        CHECK(x(1, 1) == 0);
        CHECK(detect_transpose(x));
    }
    SUBCASE("numeric first-column cells are ignored")
    {
        auto n = table("n", {"k", "v"}, {{"1", "x"}, {"2", "y"}});
        CHECK(overlap_matrix(n, n)(1, 1) == 0);
    }
}

TEST_CASE("detect_transpose")
{
    CHECK(detect_transpose(m(0, 2, 0, 0)));
    CHECK_FALSE(detect_transpose(m(3, 2, 0, 0)));
    CHECK_FALSE(detect_transpose(m(0, 1, 0, 4)));
    for (int code = 0; code < 256; ++code) {
        std::int64_t a = code & 3, b = (code >> 2) & 3, c = (code >> 4) & 3, d = (code >> 6) & 3;
        CHECK(detect_transpose(m(a, b, c, d)) == (b > 0 && a == 0 && d == 0));
    }
}

TEST_CASE("transpose")
{
    auto t = table("t", {"k", "v"}, {{"a", "1"}, {"b", "2"}});
    auto x = transpose(t);
    CHECK(x.headers == std::vector<std::string>{"k", "a", "b"});
    REQUIRE(x.rows.size() == 1);
    CHECK(x.rows[0] == std::vector<Cell>{Cell::parse("v"), Cell::parse("1"), Cell::parse("2")});
    CHECK(transpose(x) == t);
    CHECK_THROWS_AS(transpose(table("one", {"k"}, {{"a"}})), InvalidArgument);

    synthetic::Rng rng(4);
    for (int i = 0; i < 50; ++i) {
        auto q = synthetic::random_orientable_table(rng);
        CHECK(transpose(transpose(q)) == q);
    }
}

TEST_CASE("integrate_pair")
{
    SUBCASE("self integration is the identity up to row order")
    {
        auto q = table("q", {"model", "acc"}, {{"m1", "1"}, {"m2", ""}, {"m3", "3"}});
        auto out = integrate_pair(IntegratedTable::from_table(q), q);
        CHECK(out.headers == q.headers);
        CHECK(grid(out) == grid(IntegratedTable::from_table(q)));
    }
    SUBCASE("disjoint schemas and keys give a block-diagonal outer union")
    {
        auto a = table("a", {"model", "acc"}, {{"m1", "1"}});
        auto b = table("b", {"dataset", "bleu"}, {{"wmt", "30"}});
        auto out = integrate_pair(IntegratedTable::from_table(a), b);
        CHECK(out.headers == std::vector<std::string>{"model", "acc", "dataset", "bleu"});
        CHECK(grid(out) == std::vector<std::vector<std::string>>{{"<null>", "<null>", "wmt", "30"},
                                                                 {"m1", "1", "<null>", "<null>"}});
    }
    SUBCASE("two leaderboards sharing the key and two metric columns")
    {
        auto a = table("a", {"model", "acc", "f1", "em"}, {{"m1", "70", "0.6", "50"}, {"m2", "72", "0.7", "55"}});
        auto b = table("b", {"Model", "Acc", "F1"}, {{"m2", "72", "0.7"}, {"m3", "68", "0.5"}});
        auto out = integrate_pair(IntegratedTable::from_table(a), b);
        CHECK(out.headers == std::vector<std::string>{"model", "acc", "f1", "em"});
        CHECK(grid(out) == std::vector<std::vector<std::string>>{{"m1", "70", "0.6", "50"},
                                                                 {"m2", "72", "0.7", "55"},
                                                                 {"m3", "68", "0.5", "<null>"}});
        CHECK(out.null_count() == 1);
        CHECK(out.sources == std::vector<std::string>{"a", "b"});
    }
    SUBCASE("conflicting rows are kept separately and earlier values win")
    {
        auto a = table("a", {"model", "acc"}, {{"m1", "70"}});
        auto b = table("b", {"model", "acc", "f1"}, {{"m1", "71", "0.5"}});
        auto out = integrate_pair(IntegratedTable::from_table(a), b);
        CHECK(grid(out) == std::vector<std::vector<std::string>>{{"m1", "70", "<null>"}, {"m1", "71", "0.5"}});
    }
    SUBCASE("compatible rows merge and fill nulls")
    {
        auto a = table("a", {"model", "acc"}, {{"m1", "70"}});
        auto b = table("b", {"model", "f1"}, {{"M1", "0.5"}});
        auto out = integrate_pair(IntegratedTable::from_table(a), b);
        REQUIRE(out.rows.size() == 1);
        CHECK(out.rows[0][2].str() == "0.5");
        CHECK(out.provenance[0] == std::vector<std::string>{"a", "a", "b"});
    }
}

TEST_CASE("integrate_all")
{
    auto q = table("q", {"model", "acc", "f1"}, {{"llama", "70", "0.6"}, {"qwen", "72", ""}});
    SUBCASE("no retrieved tables") { CHECK(grid(integrate_all(q, {})) == grid(IntegratedTable::from_table(q))); }
    SUBCASE("a transposed twin is detected and undone")
    {
        std::vector<EvidenceTable> r = {transpose(q)};
        r[0].id = "twin";
        auto out = integrate_all(q, r);
        CHECK(out.transposed == std::vector<std::string>{"twin"});
        CHECK(out.headers == q.headers);
        CHECK(grid(out) == grid(integrate_pair(IntegratedTable::from_table(q), q)));
    }
    SUBCASE("matches a straight-line loop")
    {
        auto t1 = table("t1", {"model", "em"}, {{"llama", "40"}, {"phi", "30"}});
        auto t2 = transpose(table("t2", {"model", "bleu"}, {{"qwen", "20"}, {"llama", "21"}}));
        std::vector<EvidenceTable> r = {t1, t2};
        auto expect = IntegratedTable::from_table(q);
        for (const auto& t : r) {
            auto mm = overlap_matrix(expect, t);
            const bool flip = mm(0, 1) > 0 && mm(0, 0) == 0 && mm(1, 1) == 0;
            expect = integrate_pair(expect, flip ? transpose(t) : t);
        }
        auto got = integrate_all(q, r);
        CHECK(got.headers == expect.headers);
        CHECK(grid(got) == grid(expect));
    }
}

TEST_CASE("integration properties on random tables")
{
    synthetic::Rng rng(8);
    for (int i = 0; i < 100; ++i) {
        auto q = synthetic::random_orientable_table(rng);
        auto out = integrate_all(q, std::vector<EvidenceTable>{transpose(q)});
        CHECK(std::set<std::string>(out.headers.begin(), out.headers.end()) ==
              std::set<std::string>(q.headers.begin(), q.headers.end()));
        CHECK(cells_of(out.rows) == cells_of(q.rows));
    }
    for (int i = 0; i < 100; ++i) {
        auto tables = synthetic::random_tables(rng, {4, 6, 4});
        auto q = tables[0];
        std::vector<EvidenceTable> rest(tables.begin() + 1, tables.end());
        auto out = integrate_all(q, rest);
        std::size_t total_cols = q.column_count();
        std::multiset<std::string> inputs = cells_of(q.rows);
        for (const auto& t : rest) {
            total_cols += t.column_count();
            for (const auto& c : cells_of(t.rows)) {
                inputs.insert(c);
            }
        }
        CHECK(out.column_count() >= q.column_count());
        CHECK(out.column_count() <= total_cols);
        for (const auto& c : cells_of(out.rows)) {
            CHECK(inputs.count(c) > 0);
        }
        for (std::size_t r = 0; r < out.rows.size(); ++r) {
            CHECK(out.rows[r].size() == out.column_count());
            for (std::size_t c = 0; c < out.rows[r].size(); ++c) {
                CHECK(out.rows[r][c].is_null() == out.provenance[r][c].empty());
            }
        }
    }
}

TEST_CASE("renderings are stable")
{
    auto a = table("a", {"model", "note"}, {{"m1", "x, y"}, {"m|2", ""}});
    auto t = IntegratedTable::from_table(a);
    CHECK(to_csv(t) == "model,note\nm1,\"x, y\"\nm|2,\n");
    CHECK(to_markdown(t) == "| model | note |\n| --- | --- |\n| m1 | x, y |\n| m\\|2 |  |\n");
    auto j = to_json(t);
    CHECK(j["column_count"] == 2);
    CHECK(j["null_count"] == 1);
    CHECK(j["rows"][1][1]["source"].is_null());
}
