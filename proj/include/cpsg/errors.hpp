#pragma once

#include <stdexcept>
#include <string>

namespace cpsg {

// Error categories map 1:1 onto CLI exit codes (see tools/cpsg.cpp).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Anything that went wrong talking to (or replaying) a model backend.
struct BackendError : std::runtime_error {
    enum class Kind { timeout, http_status, malformed_payload, replay_miss, dimension_drift, other };

    BackendError(Kind kind, const std::string& msg) : std::runtime_error(msg), kind(kind) {}

    Kind kind;
};

// Invariant or precondition violations on domain data.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// A judge reply that does not match the declared verdict grammar.
struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace cpsg
