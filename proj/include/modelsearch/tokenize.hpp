#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace modelsearch {

/// Lowercases ASCII letters and splits on every ASCII character that is not
/// alphanumeric. Bytes >= 0x80 (UTF-8 sequences) are kept inside tokens.
/// Empty fragments are dropped, so the result never contains empty strings.
std::vector<std::string> normalize_token(std::string_view raw);

/// Canonical form of a cell or header used for value-set comparisons:
/// the normalized tokens joined by a single space. "" when no tokens.
std::string normalize_value(std::string_view raw);

}  // namespace modelsearch
