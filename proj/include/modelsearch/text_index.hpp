#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "modelsearch/embedding.hpp"
#include "modelsearch/lake.hpp"

namespace modelsearch {

enum class SemanticMethod { dense, sparse, hybrid };
enum class Method { dense, sparse, hybrid, keyword, joinable, unionable };

std::string to_string(SemanticMethod m);
std::string to_string(Method m);
SemanticMethod parse_semantic_method(std::string_view s);
Method parse_method(std::string_view s);
Method to_method(SemanticMethod m);

struct ScoredCard {
    std::string card_id;
    double score = 0.0;
    Method method = Method::dense;

    friend bool operator==(const ScoredCard&, const ScoredCard&) = default;
};

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

struct TextIndexConfig {
    Bm25Params bm25;
    std::size_t hybrid_pool = 100;
};

/// Okapi BM25 over normalized card-text tokens.
///
///   idf(t)   = ln(1 + (N - df + 0.5) / (df + 0.5))
///   w(t, d)  = idf(t) * tf * (k1 + 1) / (tf + k1 * (1 - b + b * |d| / avgdl))
///
/// A query scores the sum of w over its distinct tokens.
class SparseIndex {
public:
    SparseIndex() = default;
    SparseIndex(std::span<const ModelCard> cards, Bm25Params params);

    /// Score for every card, in corpus order.
    std::vector<double> scores(std::string_view query) const;

    std::size_t size() const noexcept { return doc_len_.size(); }
    const Bm25Params& params() const noexcept { return params_; }

private:
    struct Posting {
        std::size_t doc;
        std::size_t tf;
    };

    Bm25Params params_;
    std::unordered_map<std::string, std::vector<Posting>> postings_;
    std::vector<std::size_t> doc_len_;
    double avg_len_ = 0.0;
};

/// Dense scores are rounded to this step so that mathematically equal
/// cosines tie exactly (and fall back to id order) regardless of summation order.
inline constexpr double kCosineResolution = 1e-12;

/// Exhaustive cosine search over unit-norm card embeddings stored row-wise.
class DenseIndex {
public:
    DenseIndex() = default;
    DenseIndex(std::span<const ModelCard> cards, const EmbeddingProvider& provider);

    std::vector<double> scores(const EmbeddingVector& query) const;

    const Eigen::MatrixXd& embeddings() const noexcept { return embeddings_; }

private:
    Eigen::MatrixXd embeddings_;
};

/// Total order of the whole corpus under one semantic method.
struct SemanticRanking {
    std::vector<std::size_t> order;     ///< card indices, best first
    std::vector<std::size_t> position;  ///< card index -> rank position
    std::vector<double> score;          ///< card index -> reported score
};

/// Unstructured semantic search over card text: sparse, dense and hybrid.
/// Built once, then read-only; queries are safe to run concurrently.
class TextIndex {
public:
    TextIndex(const ModelLake& lake, const EmbeddingProvider& provider, TextIndexConfig config = {});

    std::vector<ScoredCard> search_dense(std::string_view q, std::size_t k) const;
    /// Cards with a zero BM25 score are never returned.
    std::vector<ScoredCard> search_sparse(std::string_view q, std::size_t k) const;
    /// Sparse top-`pool` candidates reranked by dense cosine. Requires pool >= k.
    std::vector<ScoredCard> search_hybrid(std::string_view q, std::size_t k, std::size_t pool) const;
    std::vector<ScoredCard> search_hybrid(std::string_view q, std::size_t k) const
    {
        return search_hybrid(q, k, config_.hybrid_pool);
    }
    std::vector<ScoredCard> search(SemanticMethod m, std::string_view q, std::size_t k) const;

    /// Ranks every card, including those the search would drop. Dense and
    /// sparse order by (score desc, id asc). Hybrid puts the sparse pool
    /// first (cosine desc, id asc) and then the remaining cards the same way.
    SemanticRanking rank_all(SemanticMethod m, std::string_view q) const;

    std::vector<double> dense_scores(std::string_view q) const;
    std::vector<double> sparse_scores(std::string_view q) const { return sparse_.scores(q); }

    const std::vector<std::string>& card_ids() const noexcept { return ids_; }
    const TextIndexConfig& config() const noexcept { return config_; }
    const EmbeddingProvider& provider() const noexcept { return *provider_; }

private:
    std::vector<std::size_t> sparse_pool(std::size_t pool, const std::vector<double>& bm25) const;
    std::vector<std::size_t> ordered(std::vector<std::size_t> idx, const std::vector<double>& score) const;
    std::vector<ScoredCard> take(const std::vector<std::size_t>& order, const std::vector<double>& score,
                                 std::size_t k, Method m) const;

    const EmbeddingProvider* provider_;
    TextIndexConfig config_;
    std::vector<std::string> ids_;
    SparseIndex sparse_;
    DenseIndex dense_;
};

}  // namespace modelsearch
