#pragma once
#include <cstdint>
#include <string>
#include <string_view>

namespace mlpref {

// FNV-1a 64-bit. Used for content addressing (fixtures, code dedup,
// caches); collision odds are negligible at corpus scale.
inline std::uint64_t fnv1a64(std::string_view data, std::uint64_t h = 1469598103934665603ULL) {
    for (unsigned char c : data) {
        h ^= static_cast<std::uint64_t>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string to_hex(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xF];
        v >>= 4;
    }
    return out;
}

inline std::string content_hash(std::string_view data) { return to_hex(fnv1a64(data)); }

}  // namespace mlpref
