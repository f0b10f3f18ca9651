#ifndef RSTR_ERROR_HPP
#define RSTR_ERROR_HPP

#include <stdexcept>
#include <string>

namespace rstr {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Shapes of two operands disagree (block count, feature dimension, sample count).
class DimensionError : public Error {
public:
    using Error::Error;
};

// Malformed or unreadable input file, unknown class names, non-finite values.
class DataError : public Error {
public:
    using Error::Error;
};

// Invalid run configuration or hyperparameters.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace rstr

#endif  // RSTR_ERROR_HPP
