#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "modelsearch/llm.hpp"
#include "modelsearch/nuggets.hpp"
#include "modelsearch/pipeline.hpp"

namespace modelsearch {

enum class Intent { evidence_based, comparison, experience, reason, instruction, debate };

inline constexpr std::array<Intent, 6> kIntents = {Intent::evidence_based, Intent::comparison, Intent::experience,
                                                   Intent::reason,         Intent::instruction, Intent::debate};

std::string_view to_string(Intent i);
Intent parse_intent(std::string_view s);

struct BenchmarkQuery {
    std::string id;
    std::string original;
    std::string rewritten;
    Intent intent = Intent::evidence_based;
};

/// Query file: one JSON record per line with "id" and "text".
std::vector<BenchmarkQuery> read_queries(std::istream& in);

/// Whole-word substitution of paper-oriented terms with model-oriented ones,
/// keeping capitalization. Uses assets/rewrite_map.json.
std::string rewrite_query_fallback(std::string_view text);
/// First matching phrase rule from assets/intent_rules.json; evidence-based otherwise.
Intent classify_query_fallback(std::string_view text);

/// Rewrite and intent labelling, provider-backed when one is configured.
class QueryPreparer {
public:
    explicit QueryPreparer(const CompletionProvider* provider = nullptr, const AuditLog* log = nullptr);

    std::string rewrite(std::string_view text) const;
    Intent classify(std::string_view text) const;
    BenchmarkQuery prepare(std::string id, std::string_view text) const;

private:
    const CompletionProvider* provider_;
    const AuditLog* log_;
};

/// One retrieval method under evaluation.
struct MethodSpec {
    std::string name;
    bool structured = false;
    SemanticMethod semantic = SemanticMethod::dense;
    Operator op = Operator::unionable;
};

/// dense, sparse, hybrid, keyword, joinable, unionable. Structured methods
/// anchor and rerank with `structured_semantic`.
std::vector<MethodSpec> default_methods(SemanticMethod structured_semantic = SemanticMethod::dense);
MethodSpec method_spec(std::string_view name, SemanticMethod structured_semantic = SemanticMethod::dense);

struct BenchmarkRow {
    std::string query_id;
    std::string method;
    std::size_t k = 0;
    std::size_t score = 0;
    std::size_t rank = 1;
    bool failed = false;
    std::string error;

    friend bool operator==(const BenchmarkRow&, const BenchmarkRow&) = default;
};

struct SummaryRow {
    std::string method;
    std::size_t k = 0;
    std::size_t queries = 0;
    std::size_t failed = 0;
    double mean = 0.0;
    double median = 0.0;
    std::vector<double> rank_share;  ///< index r-1 holds the fraction of queries at rank r
};

inline const std::vector<std::size_t> kDefaultBudgets = {1, 3, 5, 10};

/// Competition ranking per (query, k): 1 + number of methods with a strictly
/// higher score. Rows must be grouped by (query, k).
void assign_ranks(std::vector<BenchmarkRow>& rows);

class Benchmark {
public:
    Benchmark(const Pipeline& pipeline, const NuggetStore& store, const NuggetExtractor& extractor,
              std::size_t discovery_k = 20);

    /// Cell failures score 0 and are flagged; the run continues.
    std::vector<BenchmarkRow> run(const std::vector<BenchmarkQuery>& queries, const std::vector<MethodSpec>& methods,
                                  const std::vector<std::size_t>& budgets) const;

    /// Retrieval for one cell; exposed so callers can inspect what was scored.
    RetrievalResult retrieve(const MethodSpec& m, std::string_view q, std::size_t k) const;

private:
    const Pipeline* pipeline_;
    const NuggetStore* store_;
    const NuggetExtractor* extractor_;
    std::size_t discovery_k_;
};

/// Per method x budget mean, median and rank share, in first-seen order.
/// Throws InvalidArgument for empty input.
std::vector<SummaryRow> aggregate(const std::vector<BenchmarkRow>& rows);

void write_report_csv(std::ostream& out, const std::vector<BenchmarkRow>& rows);
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& summary);
void write_queries_csv(std::ostream& out, const std::vector<BenchmarkQuery>& queries);
void write_failures_csv(std::ostream& out, const std::vector<BenchmarkRow>& rows);

}  // namespace modelsearch
