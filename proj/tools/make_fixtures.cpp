// Regenerates the files under fixtures/ from the deterministic generators.
#include <filesystem>
#include <fstream>
#include <iostream>

#include "modelsearch/lake.hpp"
#include "modelsearch/synthetic.hpp"

namespace fs = std::filesystem;
using namespace modelsearch;

namespace {

void write_lake(const fs::path& dir, const std::string& name, const synthetic::Lake& lake)
{
    std::ofstream cards(dir / (name + "_cards.jsonl"), std::ios::binary);
    write_cards(cards, lake.cards);
    std::ofstream tables(dir / (name + "_tables.jsonl"), std::ios::binary);
    write_tables(tables, lake.tables);
}

void write_queries(const fs::path& p, const std::vector<BenchmarkQuery>& queries)
{
    std::ofstream out(p, std::ios::binary);
    for (const auto& q : queries) {
        out << json{{"id", q.id}, {"text", q.original}}.dump() << '\n';
    }
}

}  // namespace

int main(int argc, char** argv)
{
    fs::path dir = argc > 1 ? argv[1] : "fixtures";
    fs::create_directories(dir);
    write_lake(dir, "ingest", synthetic::ingest_fixture());
    write_lake(dir, "separation", synthetic::separation_lake());
    write_lake(dir, "kimi", synthetic::kimi_fixture());
    write_queries(dir / "queries.jsonl", synthetic::benchmark_queries());
    write_queries(dir / "separation_queries.jsonl", synthetic::separation_queries());
    std::cout << "wrote fixtures to " << dir << '\n';
    return 0;
}
