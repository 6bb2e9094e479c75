#pragma once

#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "pqoslat/errors.hpp"

namespace pqoslat {

/// Shortest decimal representation that round-trips to the same double.
/// Keeps CSV and checkpoint files byte-stable and save/load lossless.
inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string format_int(std::int64_t v) {
    char buf[24];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

inline double parse_double(std::string_view field, std::size_t row, std::string_view name) {
    double v = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc{} || res.ptr != field.data() + field.size()) {
        throw ValidationError("row " + std::to_string(row) + ": field " +
                              std::string(name) + " is not a number: '" +
                              std::string(field) + "'");
    }
    return v;
}

inline std::int64_t parse_int(std::string_view field, std::size_t row,
                              std::string_view name) {
    std::int64_t v = 0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc{} || res.ptr != field.data() + field.size()) {
        throw ValidationError("row " + std::to_string(row) + ": field " +
                              std::string(name) + " is not an integer: '" +
                              std::string(field) + "'");
    }
    return v;
}

} // namespace pqoslat
