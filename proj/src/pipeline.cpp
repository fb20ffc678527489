#include "modelsearch/pipeline.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "modelsearch/error.hpp"

namespace modelsearch {

Method to_method(Operator op)
{
    switch (op) {
    case Operator::keyword: return Method::keyword;
    case Operator::joinable: return Method::joinable;
    case Operator::unionable: return Method::unionable;
    }
    return Method::keyword;
}

void PipelineConfig::validate() const
{
    if (k < 1) {
        throw InvalidArgument("k must be >= 1");
    }
    if (discovery_k < k) {
        throw InvalidArgument("discovery_k (" + std::to_string(discovery_k) + ") must be >= k (" + std::to_string(k) +
                              ")");
    }
    if (anchor_count < 1) {
        throw InvalidArgument("anchor_count must be >= 1");
    }
}

std::vector<std::string> RetrievalResult::card_ids() const
{
    std::vector<std::string> out;
    out.reserve(cards.size());
    for (const auto& c : cards) {
        out.push_back(c.card_id);
    }
    return out;
}

json to_json(const RetrievalResult& r)
{
    json cards = json::array();
    for (std::size_t i = 0; i < r.cards.size(); ++i) {
        cards.push_back({{"card_id", r.cards[i].card_id},
                         {"score", r.cards[i].score},
                         {"method", to_string(r.cards[i].method)},
                         {"supporting_tables", i < r.supporting_tables.size() ? r.supporting_tables[i]
                                                                              : std::vector<std::string>{}}});
    }
    return json{{"query", r.query},
                {"method", r.method},
                {"cards", std::move(cards)},
                {"anchor_card_ids", r.anchor_card_ids},
                {"seed_table_ids", r.seed_table_ids},
                {"retrieved_table_ids", r.retrieved_table_ids},
                {"flags", r.flags}};
}

RetrievalResult result_from_json(const json& j)
{
    RetrievalResult r;
    r.query = j.value("query", std::string{});
    r.method = j.value("method", std::string{});
    for (const auto& c : j.at("cards")) {
        r.cards.push_back({c.at("card_id").get<std::string>(), c.value("score", 0.0),
                           parse_method(c.value("method", std::string("dense")))});
        r.supporting_tables.push_back(c.value("supporting_tables", std::vector<std::string>{}));
    }
    r.anchor_card_ids = j.value("anchor_card_ids", std::vector<std::string>{});
    r.seed_table_ids = j.value("seed_table_ids", std::vector<std::string>{});
    r.retrieved_table_ids = j.value("retrieved_table_ids", std::vector<std::string>{});
    r.flags = j.value("flags", std::vector<std::string>{});
    return r;
}

// ---------------------------------------------------------------------------

Pipeline::Pipeline(const ModelLake& lake, const TextIndex& text, const DiscoveryIndex& discovery)
    : lake_(&lake), text_(&text), discovery_(&discovery)
{
}

RetrievalResult Pipeline::run_unstructured(std::string_view q, SemanticMethod method, std::size_t k) const
{
    if (k < 1) {
        throw InvalidArgument("k must be >= 1");
    }
    RetrievalResult r;
    r.query = std::string(q);
    r.method = to_string(method);
    r.cards = text_->search(method, q, k);
    r.supporting_tables.resize(r.cards.size());
    return r;
}

std::vector<const ModelCard*> Pipeline::anchors(const SemanticRanking& ranking, std::size_t count) const
{
    std::vector<const ModelCard*> out;
    for (auto idx : ranking.order) {
        const auto& card = lake_->cards()[idx];
        if (!card.table_ids.empty()) {
            out.push_back(&card);
            if (out.size() == count) {
                break;
            }
        }
    }
    if (out.empty()) {
        throw AnchorNotFound("no card in the corpus has an associated table");
    }
    return out;
}

const ModelCard& Pipeline::select_anchor(std::string_view q, SemanticMethod method) const
{
    if (lake_->cards().empty()) {
        throw AnchorNotFound("corpus is empty");
    }
    return *anchors(text_->rank_all(method, q), 1).front();
}

std::size_t Pipeline::representative(const EvidenceTable& t, const SemanticRanking& ranking) const
{
    if (t.card_ids.empty()) {
        throw InvalidArgument("table " + t.id + " has no cards");
    }
    // Rank positions already encode score order with the id tie-break.
    std::size_t best = lake_->card_index(t.card_ids.front());
    for (const auto& cid : t.card_ids) {
        auto idx = lake_->card_index(cid);
        if (ranking.position[idx] < ranking.position[best]) {
            best = idx;
        }
    }
    return best;
}

std::string Pipeline::map_table_to_card(const EvidenceTable& t, std::string_view q, SemanticMethod method) const
{
    return lake_->cards()[representative(t, text_->rank_all(method, q))].id;
}

RetrievalResult Pipeline::run_structured(std::string_view q, const PipelineConfig& config) const
{
    config.validate();
    if (lake_->tables().empty()) {
        throw InvalidArgument("table lake is empty");
    }
    if (lake_->cards().empty()) {
        throw AnchorNotFound("corpus is empty");
    }

    RetrievalResult r;
    r.query = std::string(q);
    r.method = to_string(config.op);

    const auto ranking = text_->rank_all(config.semantic_method, q);

    // Anchors and their tables seed discovery.
    std::unordered_set<std::string> seen_tables;
    for (const auto* a : anchors(ranking, config.anchor_count)) {
        r.anchor_card_ids.push_back(a->id);
        for (const auto& tid : a->table_ids) {
            if (seen_tables.insert(tid).second) {
                r.seed_table_ids.push_back(tid);
            }
        }
    }

    std::unordered_set<std::string> retrieved;
    for (const auto& tid : r.seed_table_ids) {
        auto found = discovery_->search(config.op, lake_->table(tid), config.discovery_k);
        if (found.degenerate_query) {
            r.flags.push_back("degenerate_anchor_table:" + tid);
        }
        for (auto& st : found.tables) {
            if (retrieved.insert(st.table_id).second) {
                r.retrieved_table_ids.push_back(st.table_id);
            }
        }
    }

    // One representative card per retrieved table; provenance accumulates.
    std::vector<std::size_t> pool;
    std::unordered_map<std::size_t, std::vector<std::string>> support;
    for (const auto& tid : r.retrieved_table_ids) {
        auto idx = representative(lake_->table(tid), ranking);
        auto [it, fresh] = support.try_emplace(idx);
        if (fresh) {
            pool.push_back(idx);
        }
        it->second.push_back(tid);
    }

    std::sort(pool.begin(), pool.end(),
              [&](std::size_t a, std::size_t b) { return ranking.position[a] < ranking.position[b]; });
    if (pool.size() > config.k) {
        pool.resize(config.k);
    }
    for (auto idx : pool) {
        r.cards.push_back({lake_->cards()[idx].id, ranking.score[idx], to_method(config.op)});
        r.supporting_tables.push_back(std::move(support[idx]));
    }
    if (r.cards.empty()) {
        r.flags.push_back("empty_discovery");
    }
    return r;
}

}  // namespace modelsearch
