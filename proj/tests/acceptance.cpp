// Acceptance suite: one PASS/FAIL line per primary criterion. Exit status is
// the number of failed criteria.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <set>
#include <sstream>

#include "modelsearch/cli.hpp"
#include "modelsearch/eval.hpp"
#include "modelsearch/integration.hpp"
#include "support/engine_fixture.hpp"
#include "support/oracles.hpp"
#include "support/random_nuggets.hpp"

using namespace modelsearch;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

// Tolerances and sizes, fixed here so they cannot drift.
constexpr double kOperatorBudgetSeconds = 60.0;
constexpr double kSuiteBudgetSeconds = 300.0;
constexpr int kOperatorLakes = 50;
constexpr int kPipelineFixtures = 20;
constexpr int kOrientationTables = 100;
constexpr int kNuggetFixtures = 200;
constexpr int kSeparationQueries = 5;
constexpr int kSeparationWins = 4;
constexpr std::size_t kSeparationK = 5;

struct Outcome {
    bool pass;
    std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

bool same_scored(const DiscoveryResult& got, const std::vector<oracle::Scored>& want)
{
    if (got.tables.size() != want.size()) {
        return false;
    }
    for (std::size_t i = 0; i < want.size(); ++i) {
        if (got.tables[i].table_id != want[i].id || got.tables[i].score != want[i].score) {
            return false;
        }
    }
    return true;
}

Outcome operator_oracle()
{
    auto t0 = Clock::now();
    synthetic::Rng rng(20240501);
    std::size_t checks = 0, bad = 0;
    for (int lake_no = 0; lake_no < kOperatorLakes; ++lake_no) {
        auto lake = synthetic::random_tables(rng, {100, 20, 10});
        DiscoveryIndex idx(lake);
        for (int a = 0; a < 3; ++a) {
            const auto& anchor = lake[rng.below(lake.size())];
            const std::size_t k = rng.between(1, 20);
            for (auto op : {Operator::keyword, Operator::joinable, Operator::unionable}) {
                ++checks;
                bad += same_scored(idx.search(op, anchor, k), oracle::discover(op, anchor, lake, k)) ? 0 : 1;
            }
        }
    }
    const double secs = seconds_since(t0);
    return {bad == 0 && secs < kOperatorBudgetSeconds,
            std::to_string(checks - bad) + "/" + std::to_string(checks) + " rankings equal, " + fmt("%.2f s", secs)};
}

Outcome algorithm_equivalence()
{
    synthetic::Rng rng(77);
    HashingEmbedder embedder;
    std::size_t checks = 0, bad = 0;
    for (int f = 0; f < kPipelineFixtures; ++f) {
        auto fx = synthetic::random_lake(rng, 30, 50);
        auto lake = ModelLake::assemble(fx.cards, fx.tables);
        TextIndex text(lake, embedder);
        DiscoveryIndex discovery(lake.tables());
        Pipeline pipeline(lake, text, discovery);
        const std::vector<ModelCard> cards(lake.cards().begin(), lake.cards().end());
        const std::vector<EvidenceTable> tables(lake.tables().begin(), lake.tables().end());
        const auto q = synthetic::random_query(rng);
        for (auto op : {Operator::keyword, Operator::joinable, Operator::unionable}) {
            for (std::size_t k : {1, 3, 5, 10}) {
                PipelineConfig cfg;
                cfg.op = op;
                cfg.k = k;
                cfg.discovery_k = 20;
                auto got = pipeline.run_structured(q, cfg);
                auto want = oracle::run_structured(cards, tables, q, cfg.semantic_method, op, k, 20, embedder);
                ++checks;
                bool same = got.card_ids() == want.cards && got.supporting_tables == want.support &&
                            got.seed_table_ids == want.seeds && got.retrieved_table_ids == want.retrieved;
                bad += same ? 0 : 1;
            }
        }
    }
    return {bad == 0, std::to_string(checks - bad) + "/" + std::to_string(checks) + " runs identical"};
}

Outcome transpose_predicate()
{
    int agree = 0;
    for (int code = 0; code < 256; ++code) {
        std::int64_t a = code & 3, b = (code >> 2) & 3, c = (code >> 4) & 3, d = (code >> 6) & 3;
        OverlapMatrix m;
        m << a, b, c, d;
        agree += detect_transpose(m) == (b > 0 && a == 0 && d == 0) ? 1 : 0;
    }
    return {agree == 256, std::to_string(agree) + "/256 matrices"};
}

std::multiset<std::string> non_null(const std::vector<std::vector<Cell>>& rows)
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

Outcome orientation_recovery()
{
    synthetic::Rng rng(4242);
    int ok = 0;
    for (int i = 0; i < kOrientationTables; ++i) {
        auto q = synthetic::random_orientable_table(rng);
        auto out = integrate_all(q, std::vector<EvidenceTable>{transpose(q)});
        bool headers = std::set<std::string>(out.headers.begin(), out.headers.end()) ==
                       std::set<std::string>(q.headers.begin(), q.headers.end());
        ok += headers && non_null(out.rows) == non_null(q.rows) ? 1 : 0;
    }
    return {ok == kOrientationTables, std::to_string(ok) + "/" + std::to_string(kOrientationTables) + " tables"};
}

Outcome nugget_semantics()
{
    synthetic::Rng rng(5150);
    int ok = 0;
    for (int i = 0; i < kNuggetFixtures; ++i) {
        auto c = oracle::random_nugget_case(rng);
        auto store = oracle::store_of(c);
        const auto s = score_candidate_set(c.retrieved, c.constraint, store);
        bool good = s == oracle::nugget_score(c.retrieved, c.nuggets, c.constraint);
        auto twice = c.retrieved;
        twice.insert(twice.end(), c.retrieved.begin(), c.retrieved.end());
        good = good && score_candidate_set(twice, c.constraint, store) == s;
        for (const auto& extra : c.cards) {
            auto more = c.retrieved;
            more.push_back(extra);
            good = good && score_candidate_set(more, c.constraint, store) >= s;
        }
        ok += good ? 1 : 0;
    }

    auto fx = synthetic::kimi_fixture();
    std::vector<const EvidenceTable*> tables = {&fx.tables.at(0)};
    auto got = extract_nuggets_fallback(fx.cards.at(0), tables);
    const std::string id = "luisra/Kimi-K2-Instruct-4bit";
    Nugget base, bench;
    base.card_id = bench.card_id = id;
    base.values = {id, "moonshotai/Kimi-K2-Instruct", std::nullopt, std::nullopt, std::nullopt, std::nullopt};
    bench.values = {id, std::nullopt, std::nullopt, "LiveCodeBench v6", "Pass@1", "0.537"};
    const bool kimi = std::find(got.begin(), got.end(), base) != got.end() &&
                      std::find(got.begin(), got.end(), bench) != got.end();
    return {ok == kNuggetFixtures && kimi, std::to_string(ok) + "/" + std::to_string(kNuggetFixtures) +
                                               " fixtures, example card " + (kimi ? "reproduced" : "MISSING")};
}

EvidenceTable sized(std::string id, std::size_t rows, std::size_t cols)
{
    EvidenceTable t;
    t.id = std::move(id);
    for (std::size_t j = 0; j < cols; ++j) {
        t.headers.push_back("h" + std::to_string(j));
    }
    t.rows.assign(rows, std::vector<Cell>(cols, Cell::parse("x")));
    t.card_ids = {"c"};
    return t;
}

Outcome compact_boundary()
{
    std::vector<EvidenceTable> lake = {sized("199x99", 199, 99), sized("200x99", 200, 99), sized("199x100", 199, 100)};
    auto kept = filter_compact(lake);
    bool pass = kept.size() == 1 && kept[0].id == "199x99";
    std::string ids;
    for (const auto& t : kept) {
        ids += (ids.empty() ? "" : ",") + t.id;
    }
    return {pass, "retained {" + ids + "}"};
}

Outcome separation()
{
    auto engine = oracle::engine_of(synthetic::separation_lake());
    Benchmark bench(engine->pipeline(), engine->nuggets(), engine->extractor());
    auto queries = synthetic::separation_queries();
    int wins = 0;
    std::string scores;
    for (int i = 0; i < kSeparationQueries; ++i) {
        const auto& q = queries.at(static_cast<std::size_t>(i));
        auto c = engine->extractor().map_query(q.rewritten);
        auto structured = bench.retrieve(method_spec("unionable"), q.rewritten, kSeparationK).card_ids();
        auto dense = bench.retrieve(method_spec("dense"), q.rewritten, kSeparationK).card_ids();
        auto s = score_candidate_set(structured, c, engine->nuggets());
        auto d = score_candidate_set(dense, c, engine->nuggets());
        wins += s > d ? 1 : 0;
        scores += (scores.empty() ? "" : " ") + std::to_string(s) + ">" + std::to_string(d);
    }
    return {wins >= kSeparationWins, std::to_string(wins) + "/" + std::to_string(kSeparationQueries) +
                                         " queries, unionable>dense: " + scores};
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome bench_determinism()
{
    auto root = fs::temp_directory_path() / "modelsearch_acceptance_bench";
    fs::remove_all(root);
    fs::create_directories(root);
    auto fx = synthetic::separation_lake();
    build_index(fx.cards, fx.tables, root / "index", {});
    {
        std::ofstream q(root / "queries.jsonl");
        for (const auto& bq : synthetic::benchmark_queries()) {
            q << json{{"id", bq.id}, {"text", bq.original}}.dump() << '\n';
        }
        for (const auto& bq : synthetic::separation_queries()) {
            q << json{{"id", bq.id}, {"text", bq.original}}.dump() << '\n';
        }
    }
    for (const char* run : {"a", "b"}) {
        std::ostringstream out, err;
        int status = run_cli({"--index", (root / "index").string(), "bench", "--queries",
                              (root / "queries.jsonl").string(), "--out", (root / run).string()},
                             out, err);
        if (status != 0) {
            return {false, "bench exited " + std::to_string(status) + ": " + err.str()};
        }
    }
    std::size_t same = 0, files = 0;
    for (const auto& entry : fs::directory_iterator(root / "a")) {
        ++files;
        same += slurp(entry.path()) == slurp(root / "b" / entry.path().filename()) ? 1 : 0;
    }
    fs::remove_all(root);
    return {files >= 2 && same == files, std::to_string(same) + "/" + std::to_string(files) + " reports identical"};
}

}  // namespace

int main()
{
    const auto t0 = Clock::now();
    // Offline: no remote provider may be picked up from the environment.
    for (const char* var : {"MODELSEARCH_EMBED_URL", "MODELSEARCH_LLM_URL"}) {
        unsetenv(var);
    }
    const auto providers = Providers::from_env();
    const bool offline = !providers.completion && (!providers.embedder || providers.embedder->name().rfind("hashing", 0) == 0);

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"operator-oracle equivalence", operator_oracle},
        {"structured pipeline equivalence", algorithm_equivalence},
        {"transpose predicate", transpose_predicate},
        {"orientation recovery", orientation_recovery},
        {"nugget score semantics", nugget_semantics},
        {"compact-filter boundary", compact_boundary},
        {"constructed separation", separation},
        {"bench determinism", bench_determinism},
    };
    int failed = 0;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        failed += o.pass ? 0 : 1;
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << " (" << o.detail << ")" << std::endl;
    }
    const double secs = seconds_since(t0);
    const bool suite = offline && failed == 0 && secs < kSuiteBudgetSeconds;
    failed += suite ? 0 : 1;
    std::cout << (suite ? "PASS " : "FAIL ") << "offline suite under budget ("
              << (offline ? "fallback providers" : "REMOTE PROVIDER CONFIGURED") << ", " << fmt("%.1f s", secs)
              << ")" << std::endl;
    return failed;
}
