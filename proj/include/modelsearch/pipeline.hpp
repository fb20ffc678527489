#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "modelsearch/discovery.hpp"
#include "modelsearch/lake.hpp"
#include "modelsearch/text_index.hpp"

namespace modelsearch {

Method to_method(Operator op);

struct PipelineConfig {
    SemanticMethod semantic_method = SemanticMethod::dense;
    Operator op = Operator::unionable;
    std::size_t k = 5;
    std::size_t discovery_k = 20;
    std::size_t anchor_count = 1;

    /// Throws InvalidArgument unless k >= 1, discovery_k >= k and anchor_count >= 1.
    void validate() const;
};

/// Ranked cards with provenance. For structured runs every card carries the
/// retrieved tables that led to it; unstructured runs have no provenance.
struct RetrievalResult {
    std::string query;
    std::string method;
    std::vector<ScoredCard> cards;
    std::vector<std::vector<std::string>> supporting_tables;  ///< parallel to `cards`
    std::vector<std::string> anchor_card_ids;
    std::vector<std::string> seed_table_ids;
    std::vector<std::string> retrieved_table_ids;
    std::vector<std::string> flags;

    std::vector<std::string> card_ids() const;

    friend bool operator==(const RetrievalResult&, const RetrievalResult&) = default;
};

json to_json(const RetrievalResult& r);
RetrievalResult result_from_json(const json& j);

/// Text-only search and the table-driven query -> card -> table -> card
/// pipeline over shared, immutable indexes. Reentrant.
class Pipeline {
public:
    Pipeline(const ModelLake& lake, const TextIndex& text, const DiscoveryIndex& discovery);

    RetrievalResult run_unstructured(std::string_view q, SemanticMethod method, std::size_t k) const;

    /// Highest-ranked card that has at least one table. Throws AnchorNotFound.
    const ModelCard& select_anchor(std::string_view q, SemanticMethod method) const;

    /// Representative card of a table: best semantic rank among its cards,
    /// ties to the smaller id.
    std::string map_table_to_card(const EvidenceTable& t, std::string_view q, SemanticMethod method) const;

    RetrievalResult run_structured(std::string_view q, const PipelineConfig& config) const;

    const ModelLake& lake() const noexcept { return *lake_; }
    const TextIndex& text_index() const noexcept { return *text_; }
    const DiscoveryIndex& discovery_index() const noexcept { return *discovery_; }

private:
    std::vector<const ModelCard*> anchors(const SemanticRanking& ranking, std::size_t count) const;
    std::size_t representative(const EvidenceTable& t, const SemanticRanking& ranking) const;

    const ModelLake* lake_;
    const TextIndex* text_;
    const DiscoveryIndex* discovery_;
};

}  // namespace modelsearch
