#pragma once

#include <charconv>
#include <cstdarg>
#include <cstdio>
#include <string>

namespace arrowid::detail {

/// Shortest decimal form that round-trips to the same double; keeps emitted
/// files exact and byte-stable across identical runs.
inline void append_double(std::string& out, double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, res.ptr);
}

__attribute__((format(printf, 1, 2))) inline std::string strf(const char* format, ...) {
    va_list args;
    va_start(args, format);
    char buf[256];
    const int n = std::vsnprintf(buf, sizeof(buf), format, args);
    va_end(args);
    return std::string(buf, n > 0 ? static_cast<size_t>(n) : 0);
}

}  // namespace arrowid::detail
