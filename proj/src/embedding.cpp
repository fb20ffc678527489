#include "modelsearch/embedding.hpp"

#include <cstdint>
#include <cstdlib>

#include "modelsearch/http_client.hpp"

namespace modelsearch {

namespace {

std::uint64_t fnv1a(std::string_view s)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string env_or(const char* name, std::string fallback = {})
{
    const char* v = std::getenv(name);
    return v ? std::string(v) : fallback;
}

}  // namespace

EmbeddingVector EmbeddingProvider::embed(const std::string& text) const
{
    auto out = embed_batch(std::span<const std::string>(&text, 1));
    return std::move(out.at(0));
}

HashingEmbedder::HashingEmbedder(Eigen::Index dimension) : dimension_(dimension)
{
    if (dimension_ < 1) {
        throw InvalidArgument("embedding dimension must be >= 1");
    }
}

std::size_t HashingEmbedder::bucket(std::string_view gram) const
{
    return static_cast<std::size_t>(fnv1a(gram) % static_cast<std::uint64_t>(dimension_));
}

EmbeddingVector HashingEmbedder::embed_one(std::string_view text) const
{
    EmbeddingVector out{Embedding::Zero(dimension_), text.empty()};
    if (text.empty()) {
        return out;
    }
    std::string lower(text);
    for (auto& c : lower) {
        if (c >= 'A' && c <= 'Z') {
            c = static_cast<char>(c - 'A' + 'a');
        }
    }
    std::string_view s(lower);
    if (s.size() < 3) {
        out.values[static_cast<Eigen::Index>(bucket(s))] += 1.0;
    } else {
        for (std::size_t i = 0; i + 3 <= s.size(); ++i) {
            out.values[static_cast<Eigen::Index>(bucket(s.substr(i, 3)))] += 1.0;
        }
    }
    l2_normalize(out.values);
    return out;
}

std::vector<EmbeddingVector> HashingEmbedder::embed_batch(std::span<const std::string> texts) const
{
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
        out.push_back(embed_one(t));
    }
    return out;
}

RemoteEmbedder::RemoteEmbedder(RemoteSettings settings) : settings_(std::move(settings)) {}

std::vector<EmbeddingVector> RemoteEmbedder::embed_batch(std::span<const std::string> texts) const
{
    json input = json::array();
    for (const auto& t : texts) {
        input.push_back(t);
    }
    auto res = detail::post_json(settings_.base_url, "/embeddings", settings_.api_key,
                                 json{{"model", settings_.model}, {"input", std::move(input)}},
                                 settings_.timeout_seconds);
    std::vector<EmbeddingVector> out;
    try {
        const auto& data = res.at("data");
        if (data.size() != texts.size()) {
            throw ProviderError("embedding provider returned " + std::to_string(data.size()) + " vectors for " +
                                std::to_string(texts.size()) + " texts");
        }
        Eigen::Index dim = -1;
        for (std::size_t i = 0; i < data.size(); ++i) {
            const auto& vec = data[i].at("embedding");
            if (dim < 0) {
                dim = static_cast<Eigen::Index>(vec.size());
            } else if (dim != static_cast<Eigen::Index>(vec.size())) {
                throw ProviderError("embedding provider returned vectors of differing dimension");
            }
            EmbeddingVector e{Embedding(dim), texts[i].empty()};
            for (Eigen::Index d = 0; d < dim; ++d) {
                e.values[d] = vec[static_cast<std::size_t>(d)].get<double>();
            }
            if (e.empty) {
                e.values.setZero();
            }
            l2_normalize(e.values);
            out.push_back(std::move(e));
        }
    } catch (const ProviderError&) {
        throw;
    } catch (const std::exception& e) {
        throw ProviderError(std::string("malformed embedding response: ") + e.what());
    }
    return out;
}

std::unique_ptr<EmbeddingProvider> embedding_provider_from_env()
{
    auto url = env_or("MODELSEARCH_EMBED_URL");
    if (url.empty()) {
        return std::make_unique<HashingEmbedder>();
    }
    return std::make_unique<RemoteEmbedder>(
        RemoteSettings{url, env_or("MODELSEARCH_API_KEY"), env_or("MODELSEARCH_EMBED_MODEL", "default"), 60});
}

}  // namespace modelsearch
