#include "psieve/text_features.hpp"

#include "psieve/error.hpp"

#include <algorithm>
#include <stdexcept>

namespace psieve {

void FeatureConfig::validate() const {
    if (ngram_order < 1) throw Error("ngram_order must be >= 1");
    if (buckets < 2) throw Error("buckets must be >= 2");
}

std::uint64_t FeatureVector::total_count() const {
    std::uint64_t n = 0;
    for (const auto& [idx, count] : entries) n += count;
    return n;
}

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;
constexpr char32_t kInvalid = 0xFFFFFFFF;

// Decodes one UTF-8 sequence starting at text[i]; advances i. Returns
// kInvalid (consuming one byte) for malformed input.
char32_t decode_utf8(std::string_view text, std::size_t& i) {
    const auto byte = [&](std::size_t k) { return static_cast<unsigned char>(text[k]); };
    const unsigned char b0 = byte(i);
    if (b0 < 0x80) {
        ++i;
        return b0;
    }
    std::size_t len = 0;
    char32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07;
    } else {
        ++i;
        return kInvalid;
    }
    if (i + len > text.size()) {
        ++i;
        return kInvalid;
    }
    for (std::size_t k = 1; k < len; ++k) {
        const unsigned char b = byte(i + k);
        if ((b & 0xC0) != 0x80) {
            ++i;
            return kInvalid;
        }
        cp = (cp << 6) | (b & 0x3F);
    }
    static constexpr char32_t kMin[] = {0, 0, 0x80, 0x800, 0x10000};
    if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
        ++i;
        return kInvalid;
    }
    i += len;
    return cp;
}

void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

bool is_word_char(char32_t cp) {
    if (cp == kInvalid) return false;
    if (cp < 0x80)
        return (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z');
    if (cp < 0xC0) return cp == 0xAA || cp == 0xB5 || cp == 0xBA;  // Latin-1 symbols block
    if (cp == 0xD7 || cp == 0xF7) return false;                     // multiply, divide
    if (cp >= 0x2000 && cp <= 0x206F) return false;                 // general punctuation
    if (cp >= 0x2E00 && cp <= 0x2E7F) return false;                 // supplemental punctuation
    if (cp >= 0x3000 && cp <= 0x303F) return false;                 // CJK symbols and punctuation
    if (cp >= 0xFE30 && cp <= 0xFE4F) return false;                 // CJK compatibility forms
    if (cp >= 0xFF00 && cp <= 0xFF0F) return false;                 // fullwidth punctuation
    if (cp == 0xFEFF || cp == 0x1680) return false;
    return true;
}

char32_t to_lower(char32_t cp) {
    if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
    if (cp < 0xC0) return cp;
    if (cp <= 0xDE) return cp == 0xD7 ? cp : cp + 0x20;
    if (cp >= 0x100 && cp <= 0x17F) {
        // Latin Extended-A alternates upper/lower, with a parity shift at 0x139..0x148 and 0x179..0x17E.
        if ((cp >= 0x139 && cp <= 0x148) || (cp >= 0x179 && cp <= 0x17E)) return (cp % 2 == 1) ? cp + 1 : cp;
        if (cp == 0x178) return 0xFF;
        if (cp == 0x130 || cp == 0x131 || cp == 0x138 || cp == 0x149 || cp == 0x17F) return cp;
        return (cp % 2 == 0) ? cp + 1 : cp;
    }
    if (cp >= 0x391 && cp <= 0x3AB && cp != 0x3A2) return cp + 0x20;
    if (cp >= 0x410 && cp <= 0x42F) return cp + 0x20;
    if (cp >= 0x400 && cp <= 0x40F) return cp + 0x50;
    return cp;
}

}  // namespace

std::vector<std::string> normalize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    std::size_t i = 0;
    while (i < text.size()) {
        const char32_t cp = decode_utf8(text, i);
        if (is_word_char(cp)) {
            append_utf8(current, to_lower(cp));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = kFnvOffset;
    for (const char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= kFnvPrime;
    }
    return h;
}

std::uint64_t hash_ngram(std::span<const std::string> tokens) {
    if (tokens.empty()) throw std::invalid_argument("hash_ngram: empty token list");
    std::uint64_t h = kFnvOffset;
    bool first = true;
    for (const auto& tok : tokens) {
        if (!first) {
            h ^= 0x1F;
            h *= kFnvPrime;
        }
        first = false;
        for (const char c : tok) {
            h ^= static_cast<unsigned char>(c);
            h *= kFnvPrime;
        }
    }
    return h;
}

FeatureVector extract_features(std::span<const std::string> tokens, const FeatureConfig& cfg) {
    std::vector<std::uint64_t> idx;
    const std::size_t t = tokens.size();
    for (std::size_t n = 1; n <= cfg.ngram_order && n <= t; ++n)
        for (std::size_t start = 0; start + n <= t; ++start)
            idx.push_back(hash_ngram(tokens.subspan(start, n)) % cfg.buckets);
    std::sort(idx.begin(), idx.end());

    FeatureVector fv;
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j < idx.size() && idx[j] == idx[i]) ++j;
        fv.entries.emplace_back(idx[i], static_cast<std::uint32_t>(j - i));
        i = j;
    }
    return fv;
}

FeatureVector featurize(std::string_view text, const FeatureConfig& cfg) {
    const auto tokens = normalize(text);
    return extract_features(tokens, cfg);
}

}  // namespace psieve
