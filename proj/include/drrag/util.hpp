#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace drrag {

/// FNV-1a 64-bit hash. Used for embedding buckets so that token -> bucket
/// assignment is identical on every platform (std::hash makes no such
/// promise).
std::uint64_t fnv1a64(std::string_view data);

/// Hex-encoded SHA-256 of a byte string.
std::string sha256_hex(std::string_view data);

/// Hex-encoded SHA-256 of a file's contents. Throws DataError if the file
/// cannot be read.
std::string sha256_file(const std::string& path);

/// Uniform draw in [0, n). Plain modulo reduction: the bias is negligible for
/// desk-scale n and, unlike std::uniform_int_distribution, the sequence is
/// identical across standard libraries.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n);

/// Fisher-Yates shuffle driven by uniform_below, for the same
/// cross-platform-determinism reason.
template <typename T>
void deterministic_shuffle(std::vector<T>& items, std::mt19937_64& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(uniform_below(rng, i));
        std::swap(items[i - 1], items[j]);
    }
}

}  // namespace drrag
