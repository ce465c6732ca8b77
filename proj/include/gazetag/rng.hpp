#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace gazetag {

// All randomness in the pipeline flows from one root seed. Sub-streams are
// derived by hashing the root with a purpose tag and per-unit indices, so
// independent work units (repetitions, folds, trials) draw from independent
// streams regardless of scheduling order.

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

constexpr std::uint64_t hash_str(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

constexpr std::uint64_t derive_seed(std::uint64_t root, std::string_view tag,
                                    std::uint64_t a = 0, std::uint64_t b = 0,
                                    std::uint64_t c = 0) {
    std::uint64_t h = splitmix64(root ^ hash_str(tag));
    h = splitmix64(h ^ a);
    h = splitmix64(h ^ b);
    h = splitmix64(h ^ c);
    return h;
}

inline std::mt19937_64 make_rng(std::uint64_t root, std::string_view tag,
                                std::uint64_t a = 0, std::uint64_t b = 0,
                                std::uint64_t c = 0) {
    return std::mt19937_64(derive_seed(root, tag, a, b, c));
}

}  // namespace gazetag
