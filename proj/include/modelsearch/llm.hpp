#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>

#include "modelsearch/embedding.hpp"
#include "modelsearch/lake.hpp"

namespace modelsearch {

/// What went into and came out of one mapping/extraction step.
struct AuditRecord {
    std::string id;
    std::string task;
    std::string provider;
    std::string prompt_input;
    std::string provider_output;
    std::string post_processed;

    friend bool operator==(const AuditRecord&, const AuditRecord&) = default;
};

json to_json(const AuditRecord& a);

/// Stable id for (task, provider, input): 16 hex digits of FNV-1a.
std::string audit_id(std::string_view task, std::string_view provider, std::string_view input);

/// Append-only JSONL audit trail. Safe to share between threads.
class AuditLog {
public:
    explicit AuditLog(std::filesystem::path path);
    void append(const AuditRecord& record) const;
    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
    mutable std::mutex mu_;
};

class CompletionProvider {
public:
    virtual ~CompletionProvider() = default;
    virtual std::string complete(const std::string& prompt) const = 0;
    virtual std::string name() const = 0;
};

/// OpenAI-style POST {base_url}/chat/completions with temperature 0.
class RemoteCompletion final : public CompletionProvider {
public:
    explicit RemoteCompletion(RemoteSettings settings);
    std::string complete(const std::string& prompt) const override;
    std::string name() const override { return "remote:" + settings_.model; }

private:
    RemoteSettings settings_;
};

/// RemoteCompletion when MODELSEARCH_LLM_URL is set, nullptr otherwise
/// (callers then use their deterministic fallbacks).
std::unique_ptr<CompletionProvider> completion_provider_from_env();

/// Substitutes {{name}} placeholders.
std::string render_prompt(std::string_view tmpl, const std::map<std::string, std::string>& vars);

/// Parses the first JSON object or array embedded in a completion.
/// Throws ProviderError when none parses.
json parse_json_payload(const std::string& completion);

/// Embedded text assets (lexicon, rewrite map, intent rules, prompts).
/// Throws NotFound for unknown names.
std::string_view asset(std::string_view name);

}  // namespace modelsearch
