#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "modelsearch/discovery.hpp"
#include "modelsearch/embedding.hpp"
#include "modelsearch/lake.hpp"
#include "modelsearch/llm.hpp"
#include "modelsearch/nuggets.hpp"
#include "modelsearch/pipeline.hpp"
#include "modelsearch/text_index.hpp"

namespace modelsearch {

inline constexpr const char* kIndexFormat = "modelsearch-index";
inline constexpr int kIndexVersion = 1;

/// Embedding and completion backends plus the audit trail. Null members
/// select the offline fallbacks.
struct Providers {
    std::shared_ptr<const EmbeddingProvider> embedder;
    std::shared_ptr<const CompletionProvider> completion;
    std::shared_ptr<const AuditLog> audit;

    /// Reads MODELSEARCH_* variables; MODELSEARCH_AUDIT_LOG names the audit file.
    static Providers from_env();
};

struct IngestOptions {
    bool markdown_tables = false;  ///< also parse pipe tables out of card text
};

struct IngestSummary {
    std::size_t cards = 0;
    std::size_t tables = 0;
    std::size_t markdown_tables = 0;
    std::size_t dropped_large = 0;
    std::size_t nuggets = 0;
    std::vector<std::string> warnings;
};

json to_json(const IngestSummary& s);

/// Reads, filters and links the inputs, extracts nuggets, and writes an index
/// directory: manifest.json, cards.jsonl, tables.jsonl, nuggets.jsonl.
IngestSummary build_index(const std::filesystem::path& cards, const std::filesystem::path& tables,
                          const std::filesystem::path& out_dir, const IngestOptions& options,
                          const Providers& providers = {});

/// Same, from records already in memory.
IngestSummary build_index(std::vector<ModelCard> cards, std::vector<EvidenceTable> tables,
                          const std::filesystem::path& out_dir, const IngestOptions& options,
                          const Providers& providers = {});

/// All read-only indexes over one lake. Not copyable or movable: the indexes
/// point into the lake.
class Engine {
public:
    Engine(ModelLake lake, NuggetStore nuggets, Providers providers = {}, TextIndexConfig text_config = {},
           DiscoveryConfig discovery_config = {});
    Engine(const Engine&) = delete;
    Engine& operator=(const Engine&) = delete;

    /// Throws NotFound for a missing directory and IngestError for a bad
    /// format stamp or unreadable files.
    static std::unique_ptr<Engine> open(const std::filesystem::path& index_dir, Providers providers = {});

    const ModelLake& lake() const noexcept { return lake_; }
    const NuggetStore& nuggets() const noexcept { return nuggets_; }
    const TextIndex& text() const noexcept { return text_; }
    const DiscoveryIndex& discovery() const noexcept { return discovery_; }
    const Pipeline& pipeline() const noexcept { return pipeline_; }
    const NuggetExtractor& extractor() const noexcept { return extractor_; }
    const Providers& providers() const noexcept { return providers_; }

private:
    ModelLake lake_;
    NuggetStore nuggets_;
    Providers providers_;
    TextIndex text_;
    DiscoveryIndex discovery_;
    Pipeline pipeline_;
    NuggetExtractor extractor_;
};

}  // namespace modelsearch
