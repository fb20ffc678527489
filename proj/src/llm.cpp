#include "modelsearch/llm.hpp"

#include <cstdint>
#include <cstdlib>
#include <fstream>

#include "modelsearch/error.hpp"
#include "modelsearch/http_client.hpp"

namespace modelsearch {

json to_json(const AuditRecord& a)
{
    return json{{"id", a.id},
                {"task", a.task},
                {"provider", a.provider},
                {"prompt_input", a.prompt_input},
                {"provider_output", a.provider_output},
                {"post_processed", a.post_processed}};
}

std::string audit_id(std::string_view task, std::string_view provider, std::string_view input)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&](std::string_view s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        h ^= 0xff;
        h *= 0x100000001b3ULL;
    };
    mix(task);
    mix(provider);
    mix(input);
    static constexpr char hex[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = hex[h & 0xf];
        h >>= 4;
    }
    return out;
}

AuditLog::AuditLog(std::filesystem::path path) : path_(std::move(path)) {}

void AuditLog::append(const AuditRecord& record) const
{
    std::lock_guard lock(mu_);
    std::ofstream out(path_, std::ios::app);
    if (!out) {
        throw Error("cannot open audit log " + path_.string());
    }
    out << to_json(record).dump() << '\n';
}

RemoteCompletion::RemoteCompletion(RemoteSettings settings) : settings_(std::move(settings)) {}

std::string RemoteCompletion::complete(const std::string& prompt) const
{
    json body{{"model", settings_.model},
              {"temperature", 0},
              {"messages", json::array({json{{"role", "user"}, {"content", prompt}}})}};
    auto res = detail::post_json(settings_.base_url, "/chat/completions", settings_.api_key, body,
                                 settings_.timeout_seconds);
    try {
        return res.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const std::exception& e) {
        throw ProviderError(std::string("malformed completion response: ") + e.what());
    }
}

std::unique_ptr<CompletionProvider> completion_provider_from_env()
{
    const char* url = std::getenv("MODELSEARCH_LLM_URL");
    if (!url || !*url) {
        return nullptr;
    }
    const char* key = std::getenv("MODELSEARCH_API_KEY");
    const char* model = std::getenv("MODELSEARCH_LLM_MODEL");
    return std::make_unique<RemoteCompletion>(
        RemoteSettings{url, key ? key : "", model ? model : "default", 120});
}

std::string render_prompt(std::string_view tmpl, const std::map<std::string, std::string>& vars)
{
    std::string out;
    std::size_t i = 0;
    while (i < tmpl.size()) {
        auto open = tmpl.find("{{", i);
        if (open == std::string_view::npos) {
            out.append(tmpl.substr(i));
            break;
        }
        auto close = tmpl.find("}}", open + 2);
        if (close == std::string_view::npos) {
            out.append(tmpl.substr(i));
            break;
        }
        out.append(tmpl.substr(i, open - i));
        std::string name(tmpl.substr(open + 2, close - open - 2));
        if (auto it = vars.find(name); it != vars.end()) {
            out += it->second;
        } else {
            out.append(tmpl.substr(open, close + 2 - open));
        }
        i = close + 2;
    }
    return out;
}

json parse_json_payload(const std::string& completion)
{
    for (std::size_t start = completion.find_first_of("{["); start != std::string::npos;
         start = completion.find_first_of("{[", start + 1)) {
        const char close = completion[start] == '{' ? '}' : ']';
        for (auto end = completion.rfind(close); end != std::string::npos && end > start;
             end = completion.rfind(close, end - 1)) {
            auto parsed = json::parse(completion.substr(start, end - start + 1), nullptr, false);
            if (!parsed.is_discarded()) {
                return parsed;
            }
        }
    }
    throw ProviderError("completion contains no parseable JSON payload");
}

}  // namespace modelsearch
