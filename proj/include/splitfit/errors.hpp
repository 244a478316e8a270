#ifndef SPLITFIT_ERRORS_HPP
#define SPLITFIT_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace splitfit {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Mismatched vector/matrix dimensions.
class DimensionError : public Error {
public:
    explicit DimensionError(const std::string& what) : Error(what) {}
};

/// Invalid argument values (non-finite entries, bad tolerances, out-of-range
/// parameters, inconsistent configuration objects).
class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& what) : Error(what) {}
};

/// Model evaluation produced a non-finite value. Carries the sample index.
class EvaluationError : public Error {
public:
    EvaluationError(const std::string& what, std::size_t sample_index, double time)
        : Error(what), sample_index(sample_index), time(time) {}
    std::size_t sample_index;
    double time;
};

/// Secant trial vectors no longer span the parameter space.
class DegenerateSimplexError : public Error {
public:
    explicit DegenerateSimplexError(const std::string& what) : Error(what) {}
};

/// Configuration document problems (CLI exit code 2).
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what) {}
};

/// Data file problems (CLI exit code 3).
class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(what) {}
};

} // namespace splitfit

#endif
