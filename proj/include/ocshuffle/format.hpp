#pragma once

#include <cstdio>
#include <string>

namespace ocshuffle::detail {

/// Shortest round-trippable decimal form of a double, for data files.
inline std::string g17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf);
}

}  // namespace ocshuffle::detail
