#pragma once

#include <stdexcept>
#include <string>

namespace alkit {

// All library failures derive from Error so callers can catch one type.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct DimensionError : Error {
    using Error::Error;
};
struct LabelError : Error {
    using Error::Error;
};
struct StateError : Error {
    using Error::Error;
};
struct SelectionError : Error {
    using Error::Error;
};
struct SplitError : Error {
    using Error::Error;
};
struct ParseError : Error {
    using Error::Error;
};
struct ConfigError : Error {
    using Error::Error;
};
struct TrainingError : Error {
    using Error::Error;
};
struct IoError : Error {
    using Error::Error;
};

}  // namespace alkit
