#pragma once

#include <stdexcept>
#include <string>

namespace gsa {

// Input-file and validation failures (CLI exit code 1).
class LoadError : public std::runtime_error {
public:
    explicit LoadError(const std::string& msg) : std::runtime_error(msg) {}
};

// A statistic whose null scale collapsed to zero (CLI exit code 2).
class DegenerateStatisticError : public std::runtime_error {
public:
    explicit DegenerateStatisticError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace gsa
