#ifndef HSLAB_ERRORS_HPP
#define HSLAB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace hslab {

// Error taxonomy maps 1:1 onto CLI exit codes:
//   validation_error -> 2, numeric_error -> 3, inconclusive_error -> 4.
struct validation_error : std::runtime_error {
    explicit validation_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct numeric_error : std::runtime_error {
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct inconclusive_error : std::runtime_error {
    explicit inconclusive_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace hslab

#endif
