#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace verifai {

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);

/// Lowercase hex of the leading 128 bits of SHA-256.
std::string digest128_hex(std::string_view bytes);

/// FNV-1a, 64-bit.
constexpr std::uint64_t fnv1a64(std::string_view bytes) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// MurmurHash3 fmix64 finalizer.
constexpr std::uint64_t fmix64(std::uint64_t h) noexcept {
    h ^= h >> 33;
    h *= 0xff51afd7ed558ccdULL;
    h ^= h >> 33;
    h *= 0xc4ceb9fe1a85ec53ULL;
    h ^= h >> 33;
    return h;
}

/// Hash of one embedding feature: fmix64(fnv1a64(bytes)). Every hashed
/// feature in the built-in embedders goes through this function, so its
/// output is part of the on-disk format.
constexpr std::uint64_t feature_hash(std::string_view bytes) noexcept { return fmix64(fnv1a64(bytes)); }

}  // namespace verifai
