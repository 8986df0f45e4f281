#pragma once
#include <cstddef>
#include <functional>
#include <optional>
#include <string>

#include <json.hpp>

namespace mlpref {

struct ExtractedJson {
    nlohmann::json value;
    std::size_t begin = 0;  // offset of '{' in the source text
    std::size_t end = 0;    // one past the matching '}'
};

// Scans a balanced {...} region starting at `begin` (string- and
// escape-aware). Returns one past the closing brace, or npos.
inline std::size_t balanced_object_end(const std::string& text, std::size_t begin) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = begin; i < text.size(); ++i) {
        char c = text[i];
        if (in_string) {
            if (escaped)
                escaped = false;
            else if (c == '\\')
                escaped = true;
            else if (c == '"')
                in_string = false;
            continue;
        }
        if (c == '"') {
            in_string = true;
        } else if (c == '{') {
            ++depth;
        } else if (c == '}') {
            if (--depth == 0) return i + 1;
        }
    }
    return std::string::npos;
}

// Last well-formed JSON object in the text satisfying `accept`.
// Completions bury stray braces in prose, so candidate starts are tried
// from the end of the text backwards.
inline std::optional<ExtractedJson> last_json_object(
    const std::string& text, const std::function<bool(const nlohmann::json&)>& accept) {
    std::size_t pos = text.rfind('{');
    while (pos != std::string::npos) {
        std::size_t end = balanced_object_end(text, pos);
        if (end != std::string::npos) {
            auto parsed = nlohmann::json::parse(text.substr(pos, end - pos), nullptr,
                                                /*allow_exceptions=*/false);
            if (!parsed.is_discarded() && parsed.is_object() && accept(parsed))
                return ExtractedJson{std::move(parsed), pos, end};
        }
        if (pos == 0) break;
        pos = text.rfind('{', pos - 1);
    }
    return std::nullopt;
}

}  // namespace mlpref
