#pragma once
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "mlpref/core/hash.hpp"

namespace mlpref {

// Derives a stream seed from (seed, salt) so independent pipeline steps
// never share RNG state.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view salt) {
    return fnv1a64(salt, seed ^ 0x9e3779b97f4a7c15ULL);
}

// std::shuffle / std::sample are implementation-defined; this Fisher-Yates
// with raw engine output is bit-stable across platforms.
template <typename T>
void deterministic_shuffle(std::vector<T>& v, std::mt19937_64& eng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(eng() % i);
        std::swap(v[i - 1], v[j]);
    }
}

inline std::size_t bounded_rand(std::mt19937_64& eng, std::size_t n) {
    return static_cast<std::size_t>(eng() % n);
}

}  // namespace mlpref
