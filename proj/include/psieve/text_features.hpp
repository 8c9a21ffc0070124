#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace psieve {

/// Hashed bag-of-n-grams configuration. All orders 1..ngram_order are used.
struct FeatureConfig {
    std::uint32_t ngram_order = 2;
    std::uint64_t buckets = std::uint64_t{1} << 20;

    /// Throws Error when ngram_order < 1 or buckets < 2.
    void validate() const;

    friend bool operator==(const FeatureConfig&, const FeatureConfig&) = default;
};

/// Sparse count vector, sorted by bucket index with unique indices.
struct FeatureVector {
    std::vector<std::pair<std::uint64_t, std::uint32_t>> entries;

    std::uint64_t total_count() const;
    bool empty() const { return entries.empty(); }
};

/// Lowercases, turns every non-alphanumeric character into a space and
/// splits on whitespace runs. Input is UTF-8; non-ASCII letters and digits
/// are kept (with case folding for Latin-1, Latin Extended-A, Greek and
/// Cyrillic), Unicode spaces and punctuation blocks separate tokens, and
/// invalid byte sequences act as separators.
std::vector<std::string> normalize(std::string_view text);

std::uint64_t fnv1a64(std::string_view bytes);

/// FNV-1a 64 over the tokens joined with the unit separator byte 0x1F.
/// Throws std::invalid_argument on an empty token list.
std::uint64_t hash_ngram(std::span<const std::string> tokens);

FeatureVector extract_features(std::span<const std::string> tokens, const FeatureConfig& cfg);

/// normalize followed by extract_features.
FeatureVector featurize(std::string_view text, const FeatureConfig& cfg);

}  // namespace psieve
