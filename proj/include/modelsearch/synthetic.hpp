#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "modelsearch/eval.hpp"
#include "modelsearch/lake.hpp"

namespace modelsearch::synthetic {

/// mt19937_64 with hand-rolled draws, so sequences do not depend on the
/// standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, n). Requires n > 0.
    std::uint64_t below(std::uint64_t n);
    /// Uniform in [lo, hi].
    std::size_t between(std::size_t lo, std::size_t hi);
    /// True with probability num / den.
    bool chance(std::uint64_t num, std::uint64_t den) { return below(den) < num; }

    template <class T>
    const T& pick(const std::vector<T>& v)
    {
        return v[below(v.size())];
    }

private:
    std::mt19937_64 engine_;
};

struct TableShape {
    std::size_t max_tables = 100;
    std::size_t max_rows = 20;
    std::size_t max_columns = 10;
};

/// Tables over small shared header/value vocabularies so that every operator
/// finds overlaps. Includes numeric, blank and numeric-only key columns.
std::vector<EvidenceTable> random_tables(Rng& rng, const TableShape& shape);

struct Lake {
    std::vector<ModelCard> cards;
    std::vector<EvidenceTable> tables;
};

/// Cards (some without tables, some sharing tables) over `random_tables`.
Lake random_lake(Rng& rng, std::size_t max_cards = 30, std::size_t max_tables = 50);

/// Query drawn from the card-text vocabulary.
std::string random_query(Rng& rng);

/// Table with header tokens disjoint from first-column tokens and at least
/// two columns.
EvidenceTable random_orientable_table(Rng& rng);

/// 20 cards and 100 tables with every link resolvable.
Lake ingest_fixture();

/// The quantized Kimi-K2 card with its tags and evaluation table.
Lake kimi_fixture();

/// Five benchmark families spread over unionable tables of distinct cards,
/// with a table-less decoy per family whose text matches the family query.
Lake separation_lake();
/// One query per family of `separation_lake`.
std::vector<BenchmarkQuery> separation_queries();

/// Query file stand-in: 25 queries with the shape of rewritten literature
/// search requests.
std::vector<BenchmarkQuery> benchmark_queries();

}  // namespace modelsearch::synthetic
