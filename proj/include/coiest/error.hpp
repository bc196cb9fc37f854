#pragma once

#include <stdexcept>
#include <string>

namespace coiest {

/// Failure categories. Each maps to one process exit code in the CLI.
enum class ErrorKind {
  kUsage,        // bad arguments or missing inputs
  kData,         // malformed or inconsistent input data
  kNoEvent,      // detector found nothing
  kSolver,       // least-squares system unusable
  kInstability,  // simulator blew up
};

int exit_code(ErrorKind kind);

/// Structured error carrying a stable machine-readable code and the module
/// that raised it, so reports and harnesses can classify failures.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string code, std::string module, const std::string& message)
      : std::runtime_error(message), kind_(kind), code_(std::move(code)), module_(std::move(module)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& code() const noexcept { return code_; }
  const std::string& module() const noexcept { return module_; }

 private:
  ErrorKind kind_;
  std::string code_;
  std::string module_;
};

}  // namespace coiest
