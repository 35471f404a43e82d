#pragma once

#include <cstdio>
#include <string>

namespace fedcurr {

/// Fixed 17-significant-digit rendering; round-trips every double, so equal
/// values always produce equal bytes.
inline std::string format_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace fedcurr
