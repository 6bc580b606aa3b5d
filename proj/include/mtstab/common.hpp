#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace mts {

// Single absolute tolerance for every distance and value comparison.
inline constexpr double kTol = 1e-9;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class ErrorKind { Io, Validation, Guard, Parameter };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

// Exit code convention shared by the command line tool.
inline int exit_code(ErrorKind k) {
    switch (k) {
    case ErrorKind::Io: return 1;
    case ErrorKind::Validation: return 2;
    case ErrorKind::Parameter: return 2;
    case ErrorKind::Guard: return 3;
    }
    return 2;
}

} // namespace mts
