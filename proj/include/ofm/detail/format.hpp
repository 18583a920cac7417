#pragma once

#include <cassert>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <string>
#include <system_error>

#include "ofm/errors.hpp"

namespace ofm::detail {

// All float-to-text in this project goes through std::to_chars so output is
// locale-independent and byte-stable across platforms.

// Fixed 9-significant-digit policy used by report documents.
inline std::string format_sig9(double v) {
    assert(std::isfinite(v));
    if (v == 0.0) v = 0.0; // normalize -0
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 9);
    return std::string(buf, res.ptr);
}

// Shortest round-trip representation, used by curve logs and plot tables so
// downstream recomputation is lossless.
inline std::string format_shortest(double v) {
    assert(std::isfinite(v));
    if (v == 0.0) v = 0.0;
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view text, const std::string& what) {
    double v = 0.0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw parse_error("not a number in " + what + ": '" + std::string(text) + "'");
    return v;
}

} // namespace ofm::detail
