#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "modelsearch/error.hpp"
#include "modelsearch/nuggets.hpp"
#include "modelsearch/synthetic.hpp"
#include "support/oracles.hpp"
#include "support/random_nuggets.hpp"

using namespace modelsearch;
using Kind = AttributeConstraint::Kind;

namespace {

using Opt = std::optional<std::string>;

Nugget make(std::string card, Opt m, Opt b, Opt v, Opt d, Opt mn, Opt mv)
{
    Nugget n;
    n.card_id = std::move(card);
    n.values = {m, b, v, d, mn, mv};
    return n;
}

std::vector<Nugget> extract(const ModelCard& card, const std::vector<EvidenceTable>& tables)
{
    std::vector<const EvidenceTable*> ptrs;
    for (const auto& t : tables) {
        ptrs.push_back(&t);
    }
    return extract_nuggets_fallback(card, ptrs);
}

bool has(const std::vector<Nugget>& v, const Nugget& n) { return std::find(v.begin(), v.end(), n) != v.end(); }

QueryConstraint constraint(std::initializer_list<std::pair<Attribute, std::vector<std::string>>> must,
                           std::initializer_list<Attribute> required = {})
{
    QueryConstraint c;
    for (const auto& [a, terms] : must) {
        c[a].kind = Kind::must_contain;
        c[a].terms = terms;
    }
    for (auto a : required) {
        c[a].kind = Kind::required_nonnull;
    }
    return c;
}

class ScriptedCompletion final : public CompletionProvider {
public:
    explicit ScriptedCompletion(std::string reply, bool fail = false) : reply_(std::move(reply)), fail_(fail) {}
    std::string complete(const std::string& prompt) const override
    {
        last_prompt = prompt;
        if (fail_) {
            throw ProviderError("connection refused");
        }
        return reply_;
    }
    std::string name() const override { return "scripted"; }

    mutable std::string last_prompt;

private:
    std::string reply_;
    bool fail_;
};

}  // namespace

TEST_CASE("kimi card yields base-model and leaderboard nuggets")
{
    auto fx = synthetic::kimi_fixture();
    auto got = extract(fx.cards.at(0), fx.tables);
    const std::string id = "luisra/Kimi-K2-Instruct-4bit";
    CHECK(has(got, make(id, id, "moonshotai/Kimi-K2-Instruct", {}, {}, {}, {})));
    CHECK(has(got, make(id, id, {}, {}, "LiveCodeBench v6", "Pass@1", "0.537")));
    CHECK(has(got, make(id, id, {}, "quantization", {}, "quantization bits", "4-bit")));

    auto q = map_query_fallback("4-bit integer weight-only quantization");
    CHECK(q[Attribute::model_variant].kind == Kind::must_contain);
    CHECK(q[Attribute::model_variant].terms == std::vector<std::string>{"quantization"});
    std::vector<std::string> ids = {id};
    NuggetStore store;
    store.add(id, got);
    CHECK(score_candidate_set(ids, q, store) >= 1);
}

TEST_CASE("card without tables or tags has no nuggets")
{
    ModelCard c;
    c.id = "plain/model";
    c.text = "A model.";
    CHECK(extract(c, {}).empty());
}

TEST_CASE("long-format table with a metric column")
{
    ModelCard c;
    c.id = "org/m";
    EvidenceTable t;
    t.id = "org/m#t0";
    t.headers = {"Benchmark", "Metric", "m", "m-base"};
    t.rows = {{Cell::parse("MMLU"), Cell::parse("accuracy"), Cell::parse("70.1"), Cell::parse("65")},
              {Cell::parse("GSM8K"), Cell::parse("exact match"), Cell::parse("55"), Cell::parse("-")}};
    t.card_ids = {"org/m"};
    auto got = extract(c, {t});
    CHECK(got.size() == 3);
    CHECK(has(got, make("org/m", "org/m", {}, {}, "MMLU", "accuracy", "70.1")));
    CHECK(has(got, make("org/m", "org/m", {}, {}, "MMLU", "accuracy", "65")));
    CHECK(has(got, make("org/m", "org/m", {}, {}, "GSM8K", "exact match", "55")));
}

TEST_CASE("wide table takes metric names from headers")
{
    ModelCard c;
    c.id = "org/w";
    EvidenceTable t;
    t.id = "org/w#t0";
    t.headers = {"Dataset", "Accuracy", "F1", "Notes"};
    t.rows = {{Cell::parse("SQuAD"), Cell::parse("88"), Cell::parse("91.2"), Cell::parse("dev")},
              {Cell::parse("CoQA"), Cell::parse("80"), Cell::parse("84"), Cell::parse("")}};
    auto got = extract(c, {t});
    CHECK(got.size() == 4);
    CHECK(has(got, make("org/w", "org/w", {}, {}, "CoQA", "F1", "84")));

    SUBCASE("numeric first column is not a leaderboard")
    {
        EvidenceTable n = t;
        n.rows = {{Cell::parse("1"), Cell::parse("2"), Cell::parse("3"), Cell::parse("4")}};
        CHECK(extract(c, {n}).empty());
    }
}

TEST_CASE("tag rules")
{
    ModelCard c;
    c.id = "o/x";
    c.tags = {"base_model:finetune:meta/llama", "base_model:adapter:meta/llama", "gguf", "int8"};
    auto got = extract(c, {});
    CHECK(has(got, make("o/x", "o/x", "meta/llama", {}, {}, {}, {})));
    CHECK(has(got, make("o/x", "o/x", {}, "finetune", {}, {}, {})));
    CHECK(has(got, make("o/x", "o/x", {}, "adapter", {}, {}, {})));
    CHECK(has(got, make("o/x", "o/x", {}, "quantization", {}, {}, {})));
    CHECK(has(got, make("o/x", "o/x", {}, "quantization", {}, "quantization bits", "8-bit")));
    // base model appears once despite two relations
    CHECK(std::count_if(got.begin(), got.end(), [](const Nugget& n) { return n[Attribute::base_model].has_value(); })
          == 1);
}

TEST_CASE("query mapping")
{
    auto q = map_query_fallback("4-bit integer weight-only quantization");
    CHECK(q[Attribute::model_variant].terms == std::vector<std::string>{"quantization"});
    CHECK(q[Attribute::metric_value].kind == Kind::must_contain);
    CHECK(q[Attribute::metric_value].terms == std::vector<std::string>{"4", "bit"});
    CHECK(q[Attribute::dataset].kind == Kind::irrelevant);

    auto l = map_query_fallback("models evaluated on LiveCodeBench");
    CHECK(l[Attribute::dataset].kind == Kind::must_contain);
    CHECK(l[Attribute::dataset].terms == std::vector<std::string>{"livecodebench"});
    CHECK(l[Attribute::metric_name].kind == Kind::required_nonnull);
    CHECK(l[Attribute::metric_value].kind == Kind::required_nonnull);
    CHECK(l.audit.task == "map_query");
    CHECK(l.audit.id.size() == 16);

    auto v = map_query_fallback("something nice please");
    CHECK(v.any_relevant());
    CHECK(v[Attribute::dataset].kind == Kind::required_nonnull);

    CHECK_THROWS_AS(map_query_fallback(""), InvalidArgument);
    CHECK_THROWS_AS(map_query_fallback(" ,;- "), InvalidArgument);

    SUBCASE("mapping agrees with the shipped lexicon")
    {
        auto lex = json::parse(asset("lexicon.json"));
        bool found = false;
        for (const auto& e : lex["entries"]) {
            if (e["match"].size() == 1 && e["match"][0] == "livecodebench") {
                CHECK(e["must_contain"]["dataset"][0] == "livecodebench");
                found = true;
            }
        }
        CHECK(found);
    }
}

TEST_CASE("matches")
{
    auto n = make("c", "org/m", {}, "quantization", "LiveCodeBench v6", "Pass@1", "0.537");
    CHECK(matches(n, constraint({{Attribute::dataset, {"livecodebench"}}})));
    CHECK(matches(n, constraint({{Attribute::dataset, {"livecodebench", "v6"}}})));
    CHECK_FALSE(matches(n, constraint({{Attribute::dataset, {"mmlu"}}})));
    CHECK_FALSE(matches(n, constraint({}, {Attribute::base_model})));
    CHECK(matches(n, constraint({}, {Attribute::metric_value})));
    CHECK(matches(n, constraint({{Attribute::metric_name, {"pass", "1"}}})));
    CHECK(matches(n, QueryConstraint{}));
    // substring of a token is not containment
    CHECK_FALSE(matches(n, constraint({{Attribute::dataset, {"livecode"}}})));
}

TEST_CASE("candidate-set score")
{
    NuggetStore store;
    auto a = make("a", "m", {}, {}, "MMLU", "acc", "70");
    auto b = make("b", "M", {}, {}, "mmlu", "ACC", "70");  // same normalized tuple
    store.add("a", {a, make("a", "m", {}, {}, "GSM8K", "acc", "40")});
    store.add("b", {b});
    store.add("c", {make("c", "n", {}, {}, "MMLU", "acc", "71"), make("c", "n", "base", {}, {}, {}, {}),
                    make("c", "n", {}, {}, "MMLU", "acc", "72")});
    store.add("e", {});
    auto q = constraint({}, {Attribute::dataset, Attribute::metric_value});

    std::vector<std::string> none;
    CHECK(score_candidate_set(none, q, store) == 0);
    std::vector<std::string> ab = {"a", "b"};
    CHECK(score_candidate_set(ab, q, store) == 2);
    std::vector<std::string> abb = {"a", "b", "b", "e"};
    CHECK(score_candidate_set(abb, q, store) == 2);
    std::vector<std::string> all = {"a", "b", "c"};
    CHECK(score_candidate_set(all, q, store) == 4);
    auto mmlu = constraint({{Attribute::dataset, {"mmlu"}}});
    CHECK(score_candidate_set(all, mmlu, store) == 3);

    std::vector<std::string> missing = {"a", "zzz"};
    try {
        score_candidate_set(missing, q, store);
        FAIL("expected NotFound");
    } catch (const NotFound& e) {
        CHECK(std::string(e.what()).find("zzz") != std::string::npos);
    }
}

TEST_CASE("score properties on random stores")
{
    synthetic::Rng rng(29);
    for (int iter = 0; iter < 300; ++iter) {
        auto c = oracle::random_nugget_case(rng);
        auto store = oracle::store_of(c);
        auto s = score_candidate_set(c.retrieved, c.constraint, store);
        CHECK(s == oracle::nugget_score(c.retrieved, c.nuggets, c.constraint));

        // adding cards never lowers the score
        auto more = c.retrieved;
        more.push_back(c.cards.front());
        CHECK(score_candidate_set(more, c.constraint, store) >= s);

        // duplicate ids change nothing
        auto twice = c.retrieved;
        twice.insert(twice.end(), c.retrieved.begin(), c.retrieved.end());
        CHECK(score_candidate_set(twice, c.constraint, store) == s);

        // relaxing one constraint never lowers the score
        for (auto a : kAttributes) {
            auto relaxed = c.constraint;
            if (relaxed[a].kind == Kind::must_contain) {
                relaxed[a].kind = Kind::required_nonnull;
                relaxed[a].terms.clear();
            } else {
                relaxed[a].kind = Kind::irrelevant;
            }
            CHECK(score_candidate_set(c.retrieved, relaxed, store) >= s);
        }
    }
}

TEST_CASE("extraction is per card")
{
    auto lake = synthetic::separation_lake();
    auto tables_of = [&](const ModelCard& card) {
        std::vector<EvidenceTable> out;
        for (const auto& t : lake.tables) {
            if (std::find(t.card_ids.begin(), t.card_ids.end(), card.id) != t.card_ids.end()) {
                out.push_back(t);
            }
        }
        return out;
    };
    std::vector<std::vector<Nugget>> first;
    for (const auto& card : lake.cards) {
        first.push_back(extract(card, tables_of(card)));
    }
    // a new card leaves every existing card's nuggets untouched
    ModelCard extra;
    extra.id = "new/card";
    extra.tags = {"base_model:" + lake.cards.front().id};
    auto added = extract(extra, {});
    CHECK(added.size() == 1);
    for (std::size_t i = 0; i < lake.cards.size(); ++i) {
        CHECK(extract(lake.cards[i], tables_of(lake.cards[i])) == first[i]);
    }
}

TEST_CASE("store round trip")
{
    NuggetStore store;
    store.add("a", {make("a", "m", {}, {}, "MMLU", "acc", "70")});
    store.add("b", {});
    store.add("c", {make("c", "n", "base", {}, {}, {}, {}), make("c", "n", {}, "adapter", {}, {}, {})});
    CHECK_THROWS_AS(store.add("a", {}), InvalidArgument);
    CHECK(store.size() == 3);

    std::stringstream ss;
    store.write(ss);
    auto first_line = ss.str().substr(0, ss.str().find('\n'));
    CHECK(first_line
          == R"({"card_id":"a","model":"m","base_model":null,"model_variant":null,"dataset":"MMLU","metric_name":"acc","metric_value":"70"})");

    std::vector<std::string> known = {"a", "b", "c"};
    auto back = NuggetStore::read(ss, known);
    CHECK(back.card_count() == 3);
    CHECK(back.nuggets_of("c") == store.nuggets_of("c"));
    CHECK(back.nuggets_of("b").empty());
    CHECK_THROWS_AS(back.nuggets_of("d"), NotFound);

    std::stringstream bad("{\"card_id\":\"a\"}\nnot json\n");
    CHECK_THROWS_AS(NuggetStore::read(bad), IngestError);
}

TEST_CASE("provider-backed extractor")
{
    auto fx = synthetic::kimi_fixture();
    std::vector<const EvidenceTable*> ptrs = {&fx.tables[0]};
    auto dir = std::filesystem::temp_directory_path() / "modelsearch_nugget_audit";
    std::filesystem::create_directories(dir);
    auto log_path = dir / "audit.jsonl";
    std::filesystem::remove(log_path);
    AuditLog log(log_path);

    ScriptedCompletion ok(R"(Here you go:
[{"model":"luisra/Kimi-K2-Instruct-4bit","base_model":null,"model_variant":null,
  "dataset":"LiveCodeBench v6","metric_name":"Pass@1","metric_value":"0.537"},
 {"model":"luisra/Kimi-K2-Instruct-4bit","base_model":null,"model_variant":null,
  "dataset":"LiveCodeBench v6","metric_name":"Pass@1","metric_value":"0.537"}])");
    NuggetExtractor ex(&ok, &log);
    auto got = ex.extract(fx.cards[0], ptrs);
    CHECK(got.size() == 1);
    CHECK(got[0].card_id == fx.cards[0].id);
    CHECK(ok.last_prompt.find("LiveCodeBench v6") != std::string::npos);

    ScriptedCompletion mapper(R"({"dataset":["LiveCodeBench"],"metric_value":"required"})");
    NuggetExtractor mx(&mapper, &log);
    auto q = mx.map_query("models evaluated on LiveCodeBench");
    CHECK(q[Attribute::dataset].terms == std::vector<std::string>{"livecodebench"});
    CHECK(q[Attribute::metric_value].kind == Kind::required_nonnull);
    CHECK(q.audit.provider == "scripted");

    std::ifstream in(log_path);
    std::string line;
    std::vector<json> records;
    while (std::getline(in, line)) {
        records.push_back(json::parse(line));
    }
    REQUIRE(records.size() == 2);
    CHECK(records[0]["task"] == "extract_nuggets");
    CHECK(records[1]["task"] == "map_query");
    CHECK(records[1]["provider_output"].get<std::string>().find("LiveCodeBench") != std::string::npos);

    ScriptedCompletion down("", true);
    CHECK_THROWS_AS(NuggetExtractor(&down).extract(fx.cards[0], ptrs), ProviderError);
    CHECK_THROWS_AS(NuggetExtractor(&down).map_query("mmlu"), ProviderError);
    ScriptedCompletion garbage("no json here");
    CHECK_THROWS_AS(NuggetExtractor(&garbage).map_query("mmlu"), ProviderError);
    ScriptedCompletion empty("{}");
    CHECK_THROWS_AS(NuggetExtractor(&empty).map_query("mmlu"), ProviderError);
    std::filesystem::remove_all(dir);
}
