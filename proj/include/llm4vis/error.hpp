#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace llm4vis {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
    virtual const char* kind() const noexcept { return "error"; }
};

/// Corpus or store content that does not match its file format.
class IngestError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "ingest"; }
};

/// Bad configuration, flags, or violated call preconditions.
class ConfigError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "config"; }
};

/// An LLM response that does not contain a usable score object.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::string raw = {})
        : Error(what), raw_(std::move(raw)) {}
    const char* kind() const noexcept override { return "parse"; }
    const std::string& raw_response() const noexcept { return raw_; }

private:
    std::string raw_;
};

/// Provider failure, exhausted retries, or an unmatched mock request.
class GatewayError : public Error {
public:
    GatewayError(const std::string& what, std::size_t attempts = 0)
        : Error(what), attempts_(attempts) {}
    const char* kind() const noexcept override { return "gateway"; }
    std::size_t attempts() const noexcept { return attempts_; }

private:
    std::size_t attempts_;
};

}  // namespace llm4vis
