#pragma once

#include <cstdio>
#include <string>

namespace qfd {

// Shortest-ish round-trippable double formatting used by every CSV writer,
// so artifacts are reproducible byte for byte.
inline std::string fmt_g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace qfd
