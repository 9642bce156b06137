#include "gsa/table_io.hpp"

#include <cstdio>

namespace gsa {

std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

}  // namespace gsa
