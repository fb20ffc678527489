#include "modelsearch/engine.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include "modelsearch/error.hpp"

namespace modelsearch {

namespace fs = std::filesystem;

namespace {

std::shared_ptr<const EmbeddingProvider> embedder_or_default(const Providers& p)
{
    if (p.embedder) {
        return p.embedder;
    }
    return std::make_shared<HashingEmbedder>();
}

std::ofstream open_out(const fs::path& p)
{
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot write " + p.string());
    }
    return out;
}

std::ifstream open_in(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    if (!in) {
        throw IngestError("cannot read " + p.string());
    }
    return in;
}

}  // namespace

Providers Providers::from_env()
{
    Providers p;
    p.embedder = embedding_provider_from_env();
    p.completion = completion_provider_from_env();
    if (const char* audit = std::getenv("MODELSEARCH_AUDIT_LOG"); audit && *audit) {
        p.audit = std::make_shared<AuditLog>(audit);
    }
    return p;
}

json to_json(const IngestSummary& s)
{
    return json{{"cards", s.cards},
                {"tables", s.tables},
                {"markdown_tables", s.markdown_tables},
                {"dropped_large", s.dropped_large},
                {"nuggets", s.nuggets},
                {"warnings", s.warnings}};
}

IngestSummary build_index(const fs::path& cards, const fs::path& tables, const fs::path& out_dir,
                          const IngestOptions& options, const Providers& providers)
{
    return build_index(ingest_cards(cards), ingest_tables(tables), out_dir, options, providers);
}

IngestSummary build_index(std::vector<ModelCard> cards, std::vector<EvidenceTable> tables, const fs::path& out_dir,
                          const IngestOptions& options, const Providers& providers)
{
    IngestSummary summary;
    if (options.markdown_tables) {
        std::set<std::string> ids;
        for (const auto& t : tables) {
            ids.insert(t.id);
        }
        for (auto& card : cards) {
            for (auto& t : parse_markdown_tables(card.text, card.id)) {
                if (!ids.insert(t.id).second) {
                    summary.warnings.push_back("markdown table " + t.id + " clashes with an existing id; skipped");
                    continue;
                }
                card.table_ids.push_back(t.id);
                tables.push_back(std::move(t));
                ++summary.markdown_tables;
            }
        }
    }

    auto compact = filter_compact(tables);
    summary.dropped_large = tables.size() - compact.size();
    auto lake = ModelLake::assemble(std::move(cards), std::move(compact), &summary.warnings);
    summary.cards = lake.cards().size();
    summary.tables = lake.tables().size();

    NuggetExtractor extractor(providers.completion.get(), providers.audit.get());
    NuggetStore store;
    for (const auto& card : lake.cards()) {
        auto attached = lake.tables_of(card);
        auto nuggets = extractor.extract(card, attached);
        summary.nuggets += nuggets.size();
        store.add(card.id, std::move(nuggets));
    }

    fs::create_directories(out_dir);
    {
        auto out = open_out(out_dir / "cards.jsonl");
        write_cards(out, lake.cards());
    }
    {
        auto out = open_out(out_dir / "tables.jsonl");
        write_tables(out, lake.tables());
    }
    {
        auto out = open_out(out_dir / "nuggets.jsonl");
        store.write(out);
    }
    json manifest{{"format", kIndexFormat},
                  {"version", kIndexVersion},
                  {"cards", summary.cards},
                  {"tables", summary.tables},
                  {"nuggets", summary.nuggets},
                  {"nugget_extractor", providers.completion ? providers.completion->name() : "fallback"}};
    auto out = open_out(out_dir / "manifest.json");
    out << manifest.dump(2) << '\n';
    return summary;
}

Engine::Engine(ModelLake lake, NuggetStore nuggets, Providers providers, TextIndexConfig text_config,
               DiscoveryConfig discovery_config)
    : lake_(std::move(lake)),
      nuggets_(std::move(nuggets)),
      providers_([&] {
          providers.embedder = embedder_or_default(providers);
          return std::move(providers);
      }()),
      text_(lake_, *providers_.embedder, text_config),
      discovery_(lake_.tables(), discovery_config),
      pipeline_(lake_, text_, discovery_),
      extractor_(providers_.completion.get(), providers_.audit.get())
{
}

std::unique_ptr<Engine> Engine::open(const fs::path& index_dir, Providers providers)
{
    if (!fs::is_directory(index_dir)) {
        throw NotFound("index directory " + index_dir.string() + " does not exist");
    }
    json manifest;
    try {
        auto in = open_in(index_dir / "manifest.json");
        manifest = json::parse(in);
    } catch (const json::exception& e) {
        throw IngestError("index manifest is not valid JSON: " + std::string(e.what()));
    }
    if (manifest.value("format", std::string{}) != kIndexFormat || manifest.value("version", 0) != kIndexVersion) {
        throw IngestError("index directory " + index_dir.string() + " has an unsupported format stamp");
    }
    auto cards_in = open_in(index_dir / "cards.jsonl");
    auto tables_in = open_in(index_dir / "tables.jsonl");
    std::vector<std::string> warnings;
    auto lake = ModelLake::assemble(read_cards(cards_in), read_tables(tables_in), &warnings);
    if (!warnings.empty()) {
        throw IngestError("index directory is inconsistent: " + warnings.front());
    }
    std::vector<std::string> ids;
    for (const auto& c : lake.cards()) {
        ids.push_back(c.id);
    }
    auto nuggets_in = open_in(index_dir / "nuggets.jsonl");
    auto store = NuggetStore::read(nuggets_in, ids);
    return std::make_unique<Engine>(std::move(lake), std::move(store), std::move(providers));
}

}  // namespace modelsearch
