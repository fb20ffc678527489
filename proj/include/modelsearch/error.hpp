#pragma once

#include <stdexcept>
#include <string>

namespace modelsearch {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file or record.
class IngestError : public Error {
public:
    using Error::Error;
};

/// Caller violated an operation precondition.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Unknown card, table or method name.
class NotFound : public Error {
public:
    using Error::Error;
};

/// Remote provider failed in transport or returned garbage. Safe to retry.
class ProviderError : public Error {
public:
    using Error::Error;
    bool retriable() const noexcept { return true; }
};

/// No card in the ranking has an associated table.
class AnchorNotFound : public Error {
public:
    using Error::Error;
};

}  // namespace modelsearch
