#pragma once

#include <charconv>
#include <string>
#include <system_error>

namespace eplab {

// Shortest decimal text that parses back to exactly `v`.
inline std::string format_double(double v)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    if (res.ec != std::errc{})
        return "nan";
    return std::string(buf, res.ptr);
}

}  // namespace eplab
