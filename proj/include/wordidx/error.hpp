#pragma once

#include <stdexcept>
#include <string>

namespace wordidx {

enum class ErrorCode {
    invalid_argument,
    width_mismatch,
    out_of_range,
    unsorted_keys,
    parse_error,
    io_error,
    internal,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
    throw Error(code, what);
}

} // namespace wordidx
