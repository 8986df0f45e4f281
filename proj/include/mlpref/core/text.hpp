#pragma once
#include <string>
#include <string_view>

namespace mlpref {

inline std::string trim(std::string_view s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

// Last fenced code block in an LLM completion; the whole trimmed text
// when no fence is present.
inline std::string extract_code_block(const std::string& completion) {
    std::size_t end = completion.rfind("```");
    if (end == std::string::npos) return trim(completion);
    std::size_t start = completion.rfind("```", end - 1);
    if (start == std::string::npos) return trim(completion);
    std::size_t body = completion.find('\n', start);
    if (body == std::string::npos || body >= end) return {};
    return trim(completion.substr(body + 1, end - body - 1));
}

inline constexpr std::string_view kTruncationMarker = "\n...[truncated]...\n";

// Keeps head_fraction of the budget from the front and the rest from
// the tail, with a marker at the cut.
inline std::string head_tail_truncate(const std::string& text, std::size_t budget,
                                      double head_fraction = 0.75) {
    if (text.size() <= budget) return text;
    std::size_t usable = budget > kTruncationMarker.size() ? budget - kTruncationMarker.size() : 0;
    std::size_t head = static_cast<std::size_t>(static_cast<double>(usable) * head_fraction);
    std::size_t tail = usable - head;
    std::string out = text.substr(0, head);
    out += kTruncationMarker;
    out += text.substr(text.size() - tail);
    return out;
}

inline std::string tail(const std::string& text, std::size_t n) {
    return text.size() <= n ? text : text.substr(text.size() - n);
}

// Collapses every whitespace run to a single space and trims the ends.
inline std::string normalize_whitespace(std::string_view code) {
    std::string out;
    out.reserve(code.size());
    bool in_ws = true;  // leading whitespace dropped
    for (char c : code) {
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v') {
            in_ws = true;
            continue;
        }
        if (in_ws && !out.empty()) out += ' ';
        in_ws = false;
        out += c;
    }
    return out;
}

}  // namespace mlpref
