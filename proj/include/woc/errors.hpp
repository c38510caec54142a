#pragma once

#include <stdexcept>
#include <string>

namespace woc {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad user-supplied configuration (files, flags, parameter combinations).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Dataset or fixture file could not be loaded.
class LoadError : public Error {
public:
    using Error::Error;
};

// Backend transport failed after bounded retries.
class BackendError : public Error {
public:
    using Error::Error;
};

// Degenerate statistical input (zero variance, no nonzero differences, ...).
class StatsError : public Error {
public:
    using Error::Error;
};

class ArchiveError : public Error {
public:
    using Error::Error;
};

} // namespace woc
