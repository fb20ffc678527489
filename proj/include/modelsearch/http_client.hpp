#pragma once

#include <string>

#include "modelsearch/lake.hpp"

namespace modelsearch::detail {

/// POSTs a JSON body to base_url + path with an optional bearer token and
/// returns the parsed JSON response. Throws ProviderError on any failure.
json post_json(const std::string& base_url, const std::string& path, const std::string& api_key, const json& body,
               int timeout_seconds);

}  // namespace modelsearch::detail
