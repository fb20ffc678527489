#include "modelsearch/cli.hpp"

#include <cstdlib>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "modelsearch/engine.hpp"
#include "modelsearch/error.hpp"
#include "modelsearch/eval.hpp"
#include "modelsearch/integration.hpp"
#include "modelsearch/service.hpp"

namespace modelsearch {

namespace {

namespace fs = std::filesystem;

void write_file(const fs::path& p, const std::string& body)
{
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f || !(f << body)) {
        throw Error("cannot write " + p.string());
    }
}

std::string score_text(const json& v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v.get<double>());
    return buf;
}

void print_cards(std::ostream& out, const json& result)
{
    std::size_t rank = 1;
    for (const auto& c : result.at("cards")) {
        out << rank++ << '\t' << c.at("card_id").get<std::string>() << '\t' << score_text(c.at("score"));
        std::string tables;
        for (const auto& t : c.at("supporting_tables")) {
            tables += (tables.empty() ? "" : ",") + t.get<std::string>();
        }
        if (!tables.empty()) {
            out << '\t' << tables;
        }
        out << '\n';
    }
}

void print_nuggets(std::ostream& out, const json& rows)
{
    for (const auto& n : rows) {
        bool first = true;
        for (const auto& [key, v] : n.items()) {
            out << (first ? "" : "\t") << (v.is_null() ? std::string("null") : v.get<std::string>());
            first = false;
        }
        out << '\n';
    }
}

std::vector<std::size_t> parse_budgets(const std::string& s)
{
    std::vector<std::size_t> out;
    for (const auto& item : api::split_list(s)) {
        out.push_back(api::parse_count(item, "budget"));
    }
    if (out.empty()) {
        throw InvalidArgument("at least one budget is required");
    }
    return out;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Structured model-lake search: text retrieval, table discovery, integration and nugget scoring.",
                 "modelsearch"};
    app.require_subcommand(1);

    std::string index_dir = "index";
    if (const char* env = std::getenv("MODELSEARCH_INDEX"); env && *env) {
        index_dir = env;
    }
    app.add_option("--index", index_dir, "Index directory (default: $MODELSEARCH_INDEX or ./index)");

    const std::vector<std::string> semantic_names = {"dense", "sparse", "hybrid"};
    const std::vector<std::string> operator_names = {"keyword", "joinable", "unionable"};
    const std::vector<std::string> formats = {"json", "text"};

    // ingest
    std::string cards_path, tables_path, out_dir;
    bool markdown = false;
    auto* ingest = app.add_subcommand("ingest", "Build an index directory from card and table files");
    ingest->add_option("--cards", cards_path, "Card records (JSONL)")->required();
    ingest->add_option("--tables", tables_path, "Table records (JSONL)")->required();
    ingest->add_option("--out", out_dir, "Index directory to write")->required();
    ingest->add_flag("--markdown-tables", markdown, "Also extract pipe tables from card text");

    // search
    std::string q, method = "dense", format = "json";
    std::size_t k = 5;
    auto* search = app.add_subcommand("search", "Text-only card search");
    search->add_option("--method", method, "dense, sparse or hybrid")->check(CLI::IsMember(semantic_names));
    search->add_option("--q", q, "Query text")->required();
    search->add_option("--k", k, "Number of cards")->check(CLI::PositiveNumber);
    search->add_option("--format", format, "json or text")->check(CLI::IsMember(formats));

    // discover
    std::string op = "unionable", anchor_table;
    auto* discover = app.add_subcommand("discover", "Table discovery from an anchor table");
    discover->add_option("--operator", op, "keyword, joinable or unionable")->check(CLI::IsMember(operator_names));
    discover->add_option("--anchor-table", anchor_table, "Anchor table id")->required();
    discover->add_option("--k", k, "Number of tables")->check(CLI::PositiveNumber);
    discover->add_option("--format", format, "json or text")->check(CLI::IsMember(formats));

    // pipeline
    std::string semantic = "dense", result_out;
    std::size_t discovery_k = 20;
    auto* pipe = app.add_subcommand("pipeline", "Query -> anchor card -> tables -> cards");
    pipe->add_option("--q", q, "Query text")->required();
    pipe->add_option("--semantic", semantic, "dense, sparse or hybrid")->check(CLI::IsMember(semantic_names));
    pipe->add_option("--operator", op, "keyword, joinable or unionable")->check(CLI::IsMember(operator_names));
    pipe->add_option("--k", k, "Number of cards")->check(CLI::PositiveNumber);
    pipe->add_option("--discovery-k", discovery_k, "Tables retrieved per seed table")->check(CLI::PositiveNumber);
    pipe->add_option("--out", result_out, "Also write the result JSON to this file");
    pipe->add_option("--format", format, "json or text")->check(CLI::IsMember(formats));

    // integrate
    std::string table_list, integrate_format = "csv";
    auto* integ = app.add_subcommand("integrate", "Orientation-aware integration of tables");
    integ->add_option("--anchor-table", anchor_table, "Query table id")->required();
    integ->add_option("--tables", table_list, "Comma-separated table ids");
    integ->add_option("--format", integrate_format, "csv, markdown or json")
        ->check(CLI::IsMember({"csv", "markdown", "json"}));

    // nuggets
    std::string card_id, result_in, card_list;
    auto* nug = app.add_subcommand("nuggets", "Nugget extraction and scoring");
    nug->require_subcommand(1);
    auto* extract = nug->add_subcommand("extract", "Extract nuggets from one card");
    extract->add_option("--card", card_id, "Card id")->required();
    extract->add_option("--format", format, "json or text")->check(CLI::IsMember(formats));
    auto* score = nug->add_subcommand("score", "Nugget score of a retrieved card set");
    auto* result_opt = score->add_option("--result", result_in, "Result file written by pipeline --out");
    auto* cards_opt = score->add_option("--cards", card_list, "Comma-separated card ids");
    result_opt->excludes(cards_opt);
    score->add_option("--q", q, "Query text")->required();
    score->add_option("--format", format, "json or text")->check(CLI::IsMember(formats));

    // bench
    std::string queries_path, budgets = "1,3,5,10", bench_out, methods, structured_semantic = "dense";
    auto* bench = app.add_subcommand("bench", "Run all methods over a query file and write CSV reports");
    bench->add_option("--queries", queries_path, "Query records (JSONL with id, text)")->required();
    bench->add_option("--budgets", budgets, "Comma-separated k values");
    bench->add_option("--out", bench_out, "Report directory")->required();
    bench->add_option("--methods", methods, "Comma-separated subset of the six methods");
    bench->add_option("--structured-semantic", structured_semantic, "Semantic method for structured runs")
        ->check(CLI::IsMember(semantic_names));
    bench->add_option("--discovery-k", discovery_k, "Tables retrieved per seed table")->check(CLI::PositiveNumber);

    // serve
    std::string host = "127.0.0.1";
    int port = 8080;
    auto* srv = app.add_subcommand("serve", "Read-only HTTP service over an index");
    srv->add_option("--host", host, "Listen address");
    srv->add_option("--port", port, "Listen port")->check(CLI::Range(1, 65535));

    std::vector<std::string> argv_store = {"modelsearch"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : argv_store) {
        argv.push_back(a.c_str());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return 2;
    }

    auto emit = [&](const json& j, auto&& text) {
        if (format == "text") {
            text(j);
        } else {
            out << j.dump(2) << '\n';
        }
    };

    try {
        if (*ingest) {
            auto summary = build_index(cards_path, tables_path, out_dir, IngestOptions{markdown}, Providers::from_env());
            for (const auto& w : summary.warnings) {
                err << "warning: " << w << '\n';
            }
            out << to_json(summary).dump(2) << '\n';
            return 0;
        }
        if (*srv) {
            ServiceConfig cfg;
            cfg.index_dir = index_dir;
            cfg.host = host;
            cfg.port = port;
            err << "serving " << index_dir << " on http://" << host << ':' << port << '\n';
            serve(cfg, Providers::from_env());
            return 0;
        }

        auto engine = Engine::open(index_dir, Providers::from_env());
        const Engine& e = *engine;

        if (*search) {
            emit(api::search(e, q, parse_semantic_method(method), k), [&](const json& j) { print_cards(out, j); });
        } else if (*discover) {
            emit(api::discover(e, anchor_table, parse_operator(op), k), [&](const json& j) {
                std::size_t rank = 1;
                for (const auto& t : j.at("tables")) {
                    out << rank++ << '\t' << t.at("table_id").get<std::string>() << '\t' << score_text(t.at("score"))
                        << '\n';
                }
            });
        } else if (*pipe) {
            PipelineConfig cfg;
            cfg.semantic_method = parse_semantic_method(semantic);
            cfg.op = parse_operator(op);
            cfg.k = k;
            cfg.discovery_k = std::max(discovery_k, k);
            auto j = api::pipeline(e, q, cfg);
            if (!result_out.empty()) {
                write_file(result_out, j.dump(2) + "\n");
            }
            emit(j, [&](const json& r) { print_cards(out, r); });
        } else if (*integ) {
            const auto& anchor = e.lake().table(anchor_table);
            std::vector<EvidenceTable> retrieved;
            for (const auto& id : api::split_list(table_list)) {
                retrieved.push_back(e.lake().table(id));
            }
            auto integrated = integrate_all(anchor, retrieved, e.discovery().config().tau);
            if (integrate_format == "csv") {
                out << to_csv(integrated);
            } else if (integrate_format == "markdown") {
                out << to_markdown(integrated);
            } else {
                out << api::integrate(e, anchor_table, api::split_list(table_list)).dump(2) << '\n';
            }
        } else if (*extract) {
            emit(api::nugget_extract(e, card_id), [&](const json& j) { print_nuggets(out, j.at("nuggets")); });
        } else if (*score) {
            std::vector<std::string> ids;
            if (!result_in.empty()) {
                std::ifstream f(result_in);
                if (!f) {
                    throw NotFound("result file " + result_in + " does not exist");
                }
                ids = result_from_json(json::parse(f)).card_ids();
            } else {
                ids = api::split_list(card_list);
            }
            emit(api::nugget_score(e, q, ids), [&](const json& j) {
                out << "score\t" << j.at("score").dump() << '\n';
                print_nuggets(out, j.at("matching"));
            });
        } else if (*bench) {
            std::ifstream f(queries_path);
            if (!f) {
                throw NotFound("query file " + queries_path + " does not exist");
            }
            auto raw = read_queries(f);
            QueryPreparer prep(e.providers().completion.get(), e.providers().audit.get());
            std::vector<BenchmarkQuery> queries;
            for (const auto& r : raw) {
                queries.push_back(prep.prepare(r.id, r.original));
            }
            auto sem = parse_semantic_method(structured_semantic);
            std::vector<MethodSpec> specs;
            if (methods.empty()) {
                specs = default_methods(sem);
            } else {
                for (const auto& m : api::split_list(methods)) {
                    specs.push_back(method_spec(m, sem));
                }
            }
            Benchmark harness(e.pipeline(), e.nuggets(), e.extractor(), discovery_k);
            auto rows = harness.run(queries, specs, parse_budgets(budgets));
            fs::create_directories(bench_out);
            std::ostringstream report, summary, qcsv, failures;
            write_report_csv(report, rows);
            write_summary_csv(summary, aggregate(rows));
            write_queries_csv(qcsv, queries);
            write_failures_csv(failures, rows);
            write_file(fs::path(bench_out) / "report.csv", report.str());
            write_file(fs::path(bench_out) / "summary.csv", summary.str());
            write_file(fs::path(bench_out) / "queries.csv", qcsv.str());
            write_file(fs::path(bench_out) / "failures.csv", failures.str());
            std::size_t failed = 0;
            for (const auto& r : rows) {
                failed += r.failed ? 1 : 0;
            }
            out << json{{"rows", rows.size()}, {"failed", failed}, {"out", bench_out}}.dump(2) << '\n';
        }
        return 0;
    } catch (const InvalidArgument& ex) {
        err << "error: " << ex.what() << '\n';
        return 2;
    } catch (const std::exception& ex) {
        err << "error: " << ex.what() << '\n';
        return 1;
    }
}

}  // namespace modelsearch
