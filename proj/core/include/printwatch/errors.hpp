#pragma once

#include <stdexcept>
#include <string>

namespace printwatch {

// Base class for all errors raised by this library. The CLI maps each
// concrete category to a distinct exit code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File could not be opened / read / written.
class IoError : public Error {
public:
    using Error::Error;
};

/// Input bytes do not form a valid capture file (bad magic, truncated
/// record, unsupported link type).
class FormatError : public Error {
public:
    using Error::Error;
};

/// CSV header or model schema does not match what the caller expects.
class SchemaError : public Error {
public:
    using Error::Error;
};

/// A cell or document could not be parsed (carries row/column context).
class ParseError : public Error {
public:
    using Error::Error;
};

/// Caller violated a precondition (empty input, k > n, ...).
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Training could not produce a model from the given data.
class TrainingError : public Error {
public:
    using Error::Error;
};

/// A feature vector handed to a model does not match its training schema.
class ContractError : public Error {
public:
    using Error::Error;
};

} // namespace printwatch
