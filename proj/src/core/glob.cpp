#include "mlpref/core/glob.hpp"

namespace mlpref {

namespace {

bool match_from(std::string_view pat, std::size_t pi, std::string_view str, std::size_t si) {
    while (pi < pat.size()) {
        char pc = pat[pi];
        if (pc == '*') {
            bool doublestar = pi + 1 < pat.size() && pat[pi + 1] == '*';
            std::size_t next = pi + (doublestar ? 2 : 1);
            // collapse a trailing "/" of "**/" so "**/x" can also match "x"
            if (doublestar && next < pat.size() && pat[next] == '/') {
                if (match_from(pat, next + 1, str, si)) return true;
            }
            for (std::size_t k = si; k <= str.size(); ++k) {
                if (match_from(pat, next, str, k)) return true;
                if (k < str.size() && !doublestar && str[k] == '/') return false;
            }
            return false;
        }
        if (si >= str.size()) return false;
        if (pc == '?') {
            if (str[si] == '/') return false;
        } else if (pc != str[si]) {
            return false;
        }
        ++pi;
        ++si;
    }
    return si == str.size();
}

}  // namespace

bool glob_match(std::string_view pattern, std::string_view path) {
    return match_from(pattern, 0, path, 0);
}

bool matches_any(const std::vector<std::string>& patterns, std::string_view path) {
    for (const auto& p : patterns) {
        if (glob_match(p, path)) return true;
        // a bare filename pattern also matches at any depth
        if (p.find('/') == std::string::npos && glob_match("**/" + p, path)) return true;
    }
    return false;
}

}  // namespace mlpref
