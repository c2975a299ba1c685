#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace cpsg {

// Hex-encoded SHA-256 digest of arbitrary bytes.
std::string sha256_hex(std::string_view data);

// Canonical serialization of a JSON value: object keys sorted, no whitespace.
// Two requests that differ only in field order hash identically.
std::string canonical_json(const nlohmann::json& value);

inline std::string hash_json(const nlohmann::json& value) {
    return sha256_hex(canonical_json(value));
}

// FNV-1a, used where a fast deterministic non-cryptographic hash is enough
// (scripted backend, test data generation). Stable across platforms, unlike
// std::hash.
constexpr std::uint64_t fnv1a(std::string_view data) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace cpsg
