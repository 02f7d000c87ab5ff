#pragma once

#include <stdexcept>
#include <string>

namespace hetmia {

// Malformed configs, schemas, or invalid parameter combinations.
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// Problems in the data itself: bad CSV cells, infeasible splits, empty pools.
class data_error : public std::runtime_error {
public:
    explicit data_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace hetmia
