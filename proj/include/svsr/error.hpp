#pragma once

#include <stdexcept>
#include <string>

namespace svsr {

enum class ErrorCode {
    InvalidArgument = 1,
    Config = 2,
    Io = 3,
    MissingInput = 4,
    Remote = 5,
    Internal = 6,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}
    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

} // namespace svsr
