#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace dnlg {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to derive independent, stable sub-seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t root, std::uint64_t a) noexcept {
    return mix_seed(mix_seed(root) ^ a);
}

constexpr std::uint64_t derive_seed(std::uint64_t root, std::uint64_t a, std::uint64_t b) noexcept {
    return derive_seed(derive_seed(root, a), b);
}

// Stable 64-bit FNV-1a over bytes.
constexpr std::uint64_t fnv1a(std::string_view bytes) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Per-component seed derived from the root seed and a component name.
constexpr std::uint64_t component_seed(std::uint64_t root, std::string_view component) noexcept {
    return derive_seed(root, fnv1a(component));
}

}  // namespace dnlg
