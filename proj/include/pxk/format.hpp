#pragma once

#include <cstdio>
#include <string>

namespace pxk {

// 17 significant digits, '.' decimal separator; round-trips doubles exactly.
inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace pxk
