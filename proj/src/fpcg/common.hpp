#ifndef FPCG_COMMON_HPP
#define FPCG_COMMON_HPP

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace fpcg {

enum class ErrorCode {
  invalid_argument = 1,
  io = 2,
  format = 3,
  numeric = 4,
  not_found = 5,
};

// All recoverable failures in the core surface as fpcg::Error; the C API
// translates the code, the CLI maps it onto exit codes.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) { throw Error(code, msg); }

// Non-fatal diagnostics (band clamping, peeling non-convergence, ...).
// Callers may install a sink; default discards, the CLI prints to stderr.
void set_warning_handler(std::function<void(const std::string&)> handler);
void warn(const std::string& msg);

} // namespace fpcg

#endif
