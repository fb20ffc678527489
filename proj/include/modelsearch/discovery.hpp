#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "modelsearch/lake.hpp"

namespace modelsearch {

enum class Operator { keyword, joinable, unionable };

std::string to_string(Operator op);
Operator parse_operator(std::string_view s);

struct ScoredTable {
    std::string table_id;
    double score = 0.0;
    Operator op = Operator::keyword;

    friend bool operator==(const ScoredTable&, const ScoredTable&) = default;
};

struct DiscoveryResult {
    std::vector<ScoredTable> tables;
    /// The anchor yielded nothing to search with (no tokens, numeric-only key column, no rows).
    bool degenerate_query = false;
};

struct DiscoveryConfig {
    /// Minimum value-set Jaccard for two columns to align.
    double tau = 0.2;
};

/// A column reduced to what the operators compare.
struct ColumnProfile {
    std::string header;             ///< normalize_value of the header
    std::set<std::string> values;   ///< distinct normalize_value of non-null cells, blanks dropped
    bool numeric_only = false;      ///< >= 1 non-null cell and every non-null cell numeric
};

ColumnProfile profile_column(std::string_view header, std::span<const Cell> cells);
ColumnProfile profile_column(const EvidenceTable& t, std::size_t j);

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);

/// Alignment strength, or nullopt when the columns do not align. Equal
/// non-empty normalized headers always align (strength 2 + Jaccard). Otherwise
/// both value sets must be non-empty, neither column numeric-only, and
/// Jaccard >= tau (strength = Jaccard).
std::optional<double> alignment_strength(const ColumnProfile& a, const ColumnProfile& b, double tau);

inline bool column_alignment(const ColumnProfile& a, const ColumnProfile& b, double tau = 0.2)
{
    return alignment_strength(a, b, tau).has_value();
}

/// Size of a maximum one-to-one matching in a bipartite graph given as
/// adjacency lists from left vertices to right vertex indices.
std::size_t max_bipartite_matching(const std::vector<std::vector<std::size_t>>& adj, std::size_t right_count);

/// Precomputed per-table token counts and column profiles over an immutable lake.
class DiscoveryIndex {
public:
    explicit DiscoveryIndex(std::span<const EvidenceTable> tables, DiscoveryConfig config = {});

    /// Query tokens: headers plus first-column values of the anchor. Score:
    /// total occurrences of those tokens among a candidate's header and cell tokens.
    DiscoveryResult keyword_search(const EvidenceTable& anchor, std::size_t k) const;
    /// Score: max over candidate columns of the distinct-value overlap with the
    /// anchor's first column. Numeric-only columns never act as join keys.
    DiscoveryResult joinable_search(const EvidenceTable& anchor, std::size_t k) const;
    /// Score: number of anchor columns matched one-to-one to aligned candidate columns.
    DiscoveryResult unionable_search(const EvidenceTable& anchor, std::size_t k) const;

    DiscoveryResult search(Operator op, const EvidenceTable& anchor, std::size_t k) const;

    /// Tokens the keyword operator searches for, deduplicated and sorted.
    static std::vector<std::string> keyword_query(const EvidenceTable& anchor);
    /// Alignment count used by unionable_search for one candidate.
    std::size_t unionable_score(const std::vector<ColumnProfile>& anchor_cols, std::size_t candidate) const;

    const DiscoveryConfig& config() const noexcept { return config_; }

private:
    struct TableProfile {
        std::string id;
        std::unordered_map<std::string, std::size_t> token_counts;
        std::vector<ColumnProfile> columns;
    };

    std::vector<ScoredTable> rank(std::vector<ScoredTable> scored, std::size_t k) const;

    DiscoveryConfig config_;
    std::vector<TableProfile> profiles_;
};

DiscoveryResult keyword_search(const EvidenceTable& anchor, std::span<const EvidenceTable> lake, std::size_t k);
DiscoveryResult joinable_search(const EvidenceTable& anchor, std::span<const EvidenceTable> lake, std::size_t k);
DiscoveryResult unionable_search(const EvidenceTable& anchor, std::span<const EvidenceTable> lake, std::size_t k,
                                 DiscoveryConfig config = {});

}  // namespace modelsearch
