#pragma once
#include <string>
#include <string_view>
#include <vector>

namespace mlpref {

// Shell-style glob over '/'-separated relative paths.
// '*' and '?' stay within one path segment; "**" crosses segments.
bool glob_match(std::string_view pattern, std::string_view path);

bool matches_any(const std::vector<std::string>& patterns, std::string_view path);

}  // namespace mlpref
