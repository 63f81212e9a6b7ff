#pragma once

#include <stdexcept>
#include <string>

namespace loanhazard {

/// Failure categories. The CLI maps each one onto a process exit code.
enum class Errc {
    InvalidArgument,  // precondition violated by the caller
    Schema,           // malformed or incomplete input data
    EmptyResult,      // a filter or query produced nothing
    UnknownKey,       // requested band/cause/preset does not exist
    Incompatible,     // inputs that must agree (age grids, lengths) do not
    Numerical,        // root bracketing or optimizer failure
};

class Error : public std::runtime_error {
  public:
    Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

    Errc code() const noexcept { return code_; }

  private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool ok, const std::string& what) {
    if (!ok) fail(Errc::InvalidArgument, what);
}

/// Process exit code for an error category (0 is reserved for success).
inline int exit_code(Errc code) {
    switch (code) {
        case Errc::Schema: return 2;
        case Errc::EmptyResult: return 3;
        case Errc::UnknownKey: return 4;
        case Errc::Incompatible: return 5;
        case Errc::Numerical: return 6;
        case Errc::InvalidArgument: return 2;
    }
    return 1;
}

}  // namespace loanhazard
