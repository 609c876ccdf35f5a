#pragma once

#include <cstdio>
#include <string>

namespace cavcool {

// 17 significant digits: doubles round-trip exactly, output is byte-stable.
inline std::string format_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace cavcool
