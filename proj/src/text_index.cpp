#include "modelsearch/text_index.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "modelsearch/error.hpp"
#include "modelsearch/tokenize.hpp"

namespace modelsearch {

std::string to_string(SemanticMethod m)
{
    switch (m) {
    case SemanticMethod::dense: return "dense";
    case SemanticMethod::sparse: return "sparse";
    case SemanticMethod::hybrid: return "hybrid";
    }
    return "?";
}

std::string to_string(Method m)
{
    switch (m) {
    case Method::dense: return "dense";
    case Method::sparse: return "sparse";
    case Method::hybrid: return "hybrid";
    case Method::keyword: return "keyword";
    case Method::joinable: return "joinable";
    case Method::unionable: return "unionable";
    }
    return "?";
}

SemanticMethod parse_semantic_method(std::string_view s)
{
    if (s == "dense") return SemanticMethod::dense;
    if (s == "sparse") return SemanticMethod::sparse;
    if (s == "hybrid") return SemanticMethod::hybrid;
    throw InvalidArgument("unknown semantic method '" + std::string(s) + "'");
}

Method parse_method(std::string_view s)
{
    if (s == "keyword") return Method::keyword;
    if (s == "joinable") return Method::joinable;
    if (s == "unionable") return Method::unionable;
    return to_method(parse_semantic_method(s));
}

Method to_method(SemanticMethod m)
{
    switch (m) {
    case SemanticMethod::dense: return Method::dense;
    case SemanticMethod::sparse: return Method::sparse;
    case SemanticMethod::hybrid: return Method::hybrid;
    }
    return Method::dense;
}

// ---------------------------------------------------------------------------

SparseIndex::SparseIndex(std::span<const ModelCard> cards, Bm25Params params) : params_(params)
{
    doc_len_.reserve(cards.size());
    std::size_t total = 0;
    for (std::size_t d = 0; d < cards.size(); ++d) {
        auto tokens = normalize_token(cards[d].text);
        doc_len_.push_back(tokens.size());
        total += tokens.size();
        std::sort(tokens.begin(), tokens.end());
        for (std::size_t i = 0; i < tokens.size();) {
            std::size_t j = i;
            while (j < tokens.size() && tokens[j] == tokens[i]) {
                ++j;
            }
            postings_[tokens[i]].push_back({d, j - i});
            i = j;
        }
    }
    avg_len_ = cards.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(cards.size());
}

std::vector<double> SparseIndex::scores(std::string_view query) const
{
    std::vector<double> out(doc_len_.size(), 0.0);
    if (doc_len_.empty() || avg_len_ == 0.0) {
        return out;
    }
    auto tokens = normalize_token(query);
    std::set<std::string> distinct(tokens.begin(), tokens.end());
    const auto n = static_cast<double>(doc_len_.size());
    for (const auto& t : distinct) {
        auto it = postings_.find(t);
        if (it == postings_.end()) {
            continue;
        }
        const auto df = static_cast<double>(it->second.size());
        const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
        for (const auto& p : it->second) {
            const auto tf = static_cast<double>(p.tf);
            const double norm = params_.k1 * (1.0 - params_.b + params_.b * static_cast<double>(doc_len_[p.doc]) / avg_len_);
            out[p.doc] += idf * tf * (params_.k1 + 1.0) / (tf + norm);
        }
    }
    return out;
}

DenseIndex::DenseIndex(std::span<const ModelCard> cards, const EmbeddingProvider& provider)
{
    std::vector<std::string> texts;
    texts.reserve(cards.size());
    for (const auto& c : cards) {
        texts.push_back(c.text);
    }
    auto vecs = provider.embed_batch(texts);
    if (vecs.empty()) {
        return;
    }
    embeddings_.resize(static_cast<Eigen::Index>(vecs.size()), vecs.front().dimension());
    for (std::size_t i = 0; i < vecs.size(); ++i) {
        if (vecs[i].dimension() != embeddings_.cols()) {
            throw ProviderError("embedding dimension changed within one corpus");
        }
        embeddings_.row(static_cast<Eigen::Index>(i)) = vecs[i].values.transpose();
    }
}

std::vector<double> DenseIndex::scores(const EmbeddingVector& query) const
{
    std::vector<double> out(static_cast<std::size_t>(embeddings_.rows()), 0.0);
    if (embeddings_.rows() == 0) {
        return out;
    }
    if (query.dimension() != embeddings_.cols()) {
        throw InvalidArgument("query embedding dimension " + std::to_string(query.dimension()) +
                              " does not match index dimension " + std::to_string(embeddings_.cols()));
    }
    // Stored rows and the query are unit norm (or zero), so the dot product is the cosine.
    Eigen::VectorXd s = embeddings_ * query.values;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        const double c = std::clamp(s[i], -1.0, 1.0);
        out[static_cast<std::size_t>(i)] = std::round(c / kCosineResolution) * kCosineResolution;
    }
    return out;
}

// ---------------------------------------------------------------------------

TextIndex::TextIndex(const ModelLake& lake, const EmbeddingProvider& provider, TextIndexConfig config)
    : provider_(&provider), config_(config), sparse_(lake.cards(), config.bm25), dense_(lake.cards(), provider)
{
    ids_.reserve(lake.cards().size());
    for (const auto& c : lake.cards()) {
        ids_.push_back(c.id);
    }
}

std::vector<double> TextIndex::dense_scores(std::string_view q) const
{
    return dense_.scores(provider_->embed(std::string(q)));
}

std::vector<std::size_t> TextIndex::ordered(std::vector<std::size_t> idx, const std::vector<double>& score) const
{
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (score[a] != score[b]) {
            return score[a] > score[b];
        }
        return ids_[a] < ids_[b];
    });
    return idx;
}

std::vector<ScoredCard> TextIndex::take(const std::vector<std::size_t>& order, const std::vector<double>& score,
                                        std::size_t k, Method m) const
{
    std::vector<ScoredCard> out;
    for (std::size_t i = 0; i < order.size() && out.size() < k; ++i) {
        out.push_back({ids_[order[i]], score[order[i]], m});
    }
    return out;
}

std::vector<std::size_t> TextIndex::sparse_pool(std::size_t pool, const std::vector<double>& bm25) const
{
    std::vector<std::size_t> hits;
    for (std::size_t i = 0; i < bm25.size(); ++i) {
        if (bm25[i] > 0.0) {
            hits.push_back(i);
        }
    }
    hits = ordered(std::move(hits), bm25);
    if (hits.size() > pool) {
        hits.resize(pool);
    }
    return hits;
}

std::vector<ScoredCard> TextIndex::search_dense(std::string_view q, std::size_t k) const
{
    auto s = dense_scores(q);
    std::vector<std::size_t> all(s.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return take(ordered(std::move(all), s), s, k, Method::dense);
}

std::vector<ScoredCard> TextIndex::search_sparse(std::string_view q, std::size_t k) const
{
    auto s = sparse_.scores(q);
    return take(sparse_pool(s.size(), s), s, k, Method::sparse);
}

std::vector<ScoredCard> TextIndex::search_hybrid(std::string_view q, std::size_t k, std::size_t pool) const
{
    if (pool < k) {
        throw InvalidArgument("hybrid pool (" + std::to_string(pool) + ") must be >= k (" + std::to_string(k) + ")");
    }
    auto bm25 = sparse_.scores(q);
    auto candidates = sparse_pool(pool, bm25);
    if (candidates.empty()) {
        return {};
    }
    auto cos = dense_scores(q);
    return take(ordered(std::move(candidates), cos), cos, k, Method::hybrid);
}

std::vector<ScoredCard> TextIndex::search(SemanticMethod m, std::string_view q, std::size_t k) const
{
    switch (m) {
    case SemanticMethod::dense: return search_dense(q, k);
    case SemanticMethod::sparse: return search_sparse(q, k);
    case SemanticMethod::hybrid: return search_hybrid(q, k);
    }
    return {};
}

SemanticRanking TextIndex::rank_all(SemanticMethod m, std::string_view q) const
{
    SemanticRanking r;
    const std::size_t n = ids_.size();
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    switch (m) {
    case SemanticMethod::dense:
        r.score = dense_scores(q);
        r.order = ordered(std::move(all), r.score);
        break;
    case SemanticMethod::sparse:
        r.score = sparse_.scores(q);
        r.order = ordered(std::move(all), r.score);
        break;
    case SemanticMethod::hybrid: {
        auto bm25 = sparse_.scores(q);
        auto pool = sparse_pool(config_.hybrid_pool, bm25);
        r.score = dense_scores(q);
        std::vector<bool> in_pool(n, false);
        for (auto i : pool) {
            in_pool[i] = true;
        }
        std::vector<std::size_t> rest;
        for (auto i : all) {
            if (!in_pool[i]) {
                rest.push_back(i);
            }
        }
        r.order = ordered(std::move(pool), r.score);
        auto tail = ordered(std::move(rest), r.score);
        r.order.insert(r.order.end(), tail.begin(), tail.end());
        break;
    }
    }
    r.position.assign(n, 0);
    for (std::size_t p = 0; p < r.order.size(); ++p) {
        r.position[r.order[p]] = p;
    }
    return r;
}

}  // namespace modelsearch
