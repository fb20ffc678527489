#include "modelsearch/tokenize.hpp"

namespace modelsearch {

namespace {

bool is_token_byte(unsigned char c)
{
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

}  // namespace

std::vector<std::string> normalize_token(std::string_view raw)
{
    std::vector<std::string> out;
    std::string current;
    for (unsigned char c : raw) {
        if (is_token_byte(c)) {
            current.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c));
        } else if (!current.empty()) {
            out.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) {
        out.push_back(std::move(current));
    }
    return out;
}

std::string normalize_value(std::string_view raw)
{
    std::string out;
    for (auto& tok : normalize_token(raw)) {
        if (!out.empty()) {
            out.push_back(' ');
        }
        out += tok;
    }
    return out;
}

}  // namespace modelsearch
