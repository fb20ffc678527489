#pragma once

#include <algorithm>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "modelsearch/error.hpp"

namespace modelsearch {

template <typename Scalar>
using EmbeddingT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using Embedding = EmbeddingT<double>;

/// Unit-norm embedding, or the zero vector flagged `empty` for blank text.
struct EmbeddingVector {
    Embedding values;
    bool empty = false;

    Eigen::Index dimension() const noexcept { return values.size(); }
};

/// Cosine similarity in [-1, 1]; 0 when either side is the zero vector.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar cosine(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b)
{
    using Scalar = typename DerivedA::Scalar;
    if (a.size() != b.size()) {
        throw InvalidArgument("cosine: dimension mismatch (" + std::to_string(a.size()) + " vs " +
                              std::to_string(b.size()) + ")");
    }
    const Scalar na = a.norm();
    const Scalar nb = b.norm();
    if (na == Scalar(0) || nb == Scalar(0)) {
        return Scalar(0);
    }
    const Scalar c = a.dot(b) / (na * nb);
    return std::clamp(c, Scalar(-1), Scalar(1));
}

inline double cosine(const EmbeddingVector& a, const EmbeddingVector& b) { return cosine(a.values, b.values); }

/// Scales `v` to unit L2 norm in place; leaves the zero vector untouched.
template <typename Derived>
void l2_normalize(Eigen::MatrixBase<Derived>& v)
{
    const auto n = v.norm();
    if (n > 0) {
        v /= n;
    }
}

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;

    virtual std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const = 0;
    virtual std::string name() const = 0;

    EmbeddingVector embed(const std::string& text) const;
};

/// Offline default: character 3-grams of the ASCII-lowercased text hashed
/// (FNV-1a, 64 bit) into `dimension` buckets, counted, then L2-normalized.
/// Non-empty text shorter than three bytes is hashed as a single gram.
class HashingEmbedder final : public EmbeddingProvider {
public:
    static constexpr Eigen::Index kDefaultDimension = 256;

    explicit HashingEmbedder(Eigen::Index dimension = kDefaultDimension);

    std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const override;
    std::string name() const override { return "hashing-3gram-" + std::to_string(dimension_); }

    EmbeddingVector embed_one(std::string_view text) const;
    /// Bucket a single gram lands in.
    std::size_t bucket(std::string_view gram) const;

private:
    Eigen::Index dimension_;
};

struct RemoteSettings {
    std::string base_url;  ///< e.g. http://localhost:8080/v1
    std::string api_key;
    std::string model;
    int timeout_seconds = 60;
};

/// OpenAI-style POST {base_url}/embeddings. Transport or format failures
/// throw ProviderError; there is no silent fallback.
class RemoteEmbedder final : public EmbeddingProvider {
public:
    explicit RemoteEmbedder(RemoteSettings settings);

    std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const override;
    std::string name() const override { return "remote:" + settings_.model; }

private:
    RemoteSettings settings_;
};

/// RemoteEmbedder when MODELSEARCH_EMBED_URL is set (with
/// MODELSEARCH_EMBED_MODEL and MODELSEARCH_API_KEY), HashingEmbedder otherwise.
std::unique_ptr<EmbeddingProvider> embedding_provider_from_env();

}  // namespace modelsearch
