#pragma once

#include <string>

namespace gsa {

// Fixed formatting for emitted tables: 12 significant digits.
std::string format_real(double v);

}  // namespace gsa
