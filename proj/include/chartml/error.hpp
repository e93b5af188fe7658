#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace chartml {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid argument or domain-rule violation (out-of-range rank, bad batch
/// size, bad fold count, mismatched columns, ...).
class ValueError : public Error {
public:
    using Error::Error;
};

/// CSV or JSON content that cannot be interpreted. Carries the source name
/// and a 1-based row number when known (0 = not row specific).
class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::string source = {}, std::size_t row = 0)
        : Error(msg), source_(std::move(source)), row_(row) {}

    const std::string& source() const noexcept { return source_; }
    std::size_t row() const noexcept { return row_; }

private:
    std::string source_;
    std::size_t row_;
};

/// Non-2xx HTTP response outside the retry protocol.
class HttpError : public Error {
public:
    HttpError(const std::string& msg, int status) : Error(msg), status_(status) {}
    int status() const noexcept { return status_; }

private:
    int status_;
};

/// Token endpoint rejected the credentials (or they were never provided).
class AuthError : public Error {
public:
    explicit AuthError(const std::string& msg, int status = 0) : Error(msg), status_(status) {}
    int status() const noexcept { return status_; }

private:
    int status_;
};

/// Throttling persisted past the configured retry budget.
class RetriesExhausted : public Error {
public:
    RetriesExhausted(const std::string& msg, int last_status, int attempts)
        : Error(msg), last_status_(last_status), attempts_(attempts) {}
    int last_status() const noexcept { return last_status_; }
    int attempts() const noexcept { return attempts_; }

private:
    int last_status_;
    int attempts_;
};

/// Response body parsed but required fields are missing or malformed.
class MalformedBody : public Error {
public:
    using Error::Error;
};

}  // namespace chartml
