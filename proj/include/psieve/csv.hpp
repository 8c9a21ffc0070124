#pragma once

#include <cstdio>
#include <cstdlib>
#include <string>
#include <string_view>
#include <vector>

namespace psieve::csv {

/// Fixed-point rendering with the given number of decimals ("%.*f").
inline std::string fixed(double value, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
    return buf;
}

/// Shortest round-trippable rendering ("%.17g" trimmed to "%g" when exact).
inline std::string number(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%g", value);
    if (std::strtod(buf, nullptr) == value) return buf;
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

/// Splits one CSV line on commas. Quoting is not supported; fields are
/// trimmed of surrounding spaces and a trailing '\r'.
inline std::vector<std::string> split(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        std::string_view field = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
        while (!field.empty() && field.back() == ' ') field.remove_suffix(1);
        out.emplace_back(field);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

}  // namespace psieve::csv
