#pragma once

#include <stdexcept>
#include <string>

namespace wued {

/// Dimension disagreement between matrices or layer inputs.
struct ShapeError : std::runtime_error {
    explicit ShapeError(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid argument value (non-positive limit, empty sequence, ...).
struct ArgError : std::runtime_error {
    explicit ArgError(const std::string& what) : std::runtime_error(what) {}
};

/// Index outside a valid range (vocabulary id, gold position, ...).
struct IndexError : std::runtime_error {
    explicit IndexError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input file; message carries the offending line number.
struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

/// Semantically invalid data (empty training set, missing labels, ...).
struct DataError : std::runtime_error {
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// A broken caller contract, e.g. a forward cache reused against the
/// wrong parameters or batch.
struct ContractError : std::runtime_error {
    explicit ContractError(const std::string& what) : std::runtime_error(what) {}
};

/// File could not be opened, read or written.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace wued
