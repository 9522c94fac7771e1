#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace nephra {

// FNV-1a 64-bit. Content fingerprint for run manifests; not a security boundary.
inline uint64_t fnv1a64(std::string_view data, uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(uint64_t v);

// Digest of a file's bytes; throws std::runtime_error if unreadable.
uint64_t digest_file(const std::string& path);

}  // namespace nephra
