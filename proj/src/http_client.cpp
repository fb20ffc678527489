#include "modelsearch/http_client.hpp"

#include "httplib.h"
#include "modelsearch/error.hpp"

namespace modelsearch::detail {

namespace {

struct SplitUrl {
    std::string origin;  // scheme://host[:port]
    std::string prefix;  // path prefix without trailing slash
};

SplitUrl split_url(const std::string& url)
{
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw ProviderError("provider URL must include a scheme: " + url);
    }
    auto path_begin = url.find('/', scheme_end + 3);
    SplitUrl out;
    out.origin = url.substr(0, path_begin);
    if (path_begin != std::string::npos) {
        out.prefix = url.substr(path_begin);
        while (!out.prefix.empty() && out.prefix.back() == '/') {
            out.prefix.pop_back();
        }
    }
    return out;
}

}  // namespace

json post_json(const std::string& base_url, const std::string& path, const std::string& api_key, const json& body,
               int timeout_seconds)
{
    auto url = split_url(base_url);
    httplib::Client client(url.origin);
    client.set_connection_timeout(timeout_seconds, 0);
    client.set_read_timeout(timeout_seconds, 0);
    httplib::Headers headers;
    if (!api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + api_key);
    }
    auto res = client.Post(url.prefix + path, headers, body.dump(), "application/json");
    if (!res) {
        throw ProviderError("provider request to " + base_url + path + " failed: " + httplib::to_string(res.error()));
    }
    if (res->status != 200) {
        throw ProviderError("provider " + base_url + path + " returned HTTP " + std::to_string(res->status));
    }
    try {
        return json::parse(res->body);
    } catch (const std::exception& e) {
        throw ProviderError(std::string("provider returned invalid JSON: ") + e.what());
    }
}

}  // namespace modelsearch::detail
