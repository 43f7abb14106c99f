#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace meddial {

// Error categories map 1:1 to CLI exit codes (see pipeline.hpp).
enum class ErrorKind {
    Config,    // bad or missing configuration
    Io,        // filesystem failures
    Data,      // malformed corpus / lexicon / graph / record content
    Endpoint,  // transport, timeout, rate limit
    Budget,    // prompt budget cannot be satisfied
    Usage,     // operation preconditions violated (role mismatch etc.)
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string code, const std::string& message)
        : std::runtime_error(message), kind_(kind), code_(std::move(code)) {}

    ErrorKind kind() const { return kind_; }

    // Stable machine-readable identifier, e.g. "MalformedRow", "BudgetExhausted".
    const std::string& code() const { return code_; }

private:
    ErrorKind kind_;
    std::string code_;
};

inline Error config_error(std::string code, const std::string& msg) {
    return Error(ErrorKind::Config, std::move(code), msg);
}
inline Error io_error(std::string code, const std::string& msg) {
    return Error(ErrorKind::Io, std::move(code), msg);
}
inline Error data_error(std::string code, const std::string& msg) {
    return Error(ErrorKind::Data, std::move(code), msg);
}
inline Error endpoint_error(std::string code, const std::string& msg) {
    return Error(ErrorKind::Endpoint, std::move(code), msg);
}

} // namespace meddial
