#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <utility>

namespace robust_t {

// Structured diagnostic carried by every library failure. `code` is a stable
// machine-readable identifier, `context` holds the offending values.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message,
        std::map<std::string, std::string> context = {})
      : std::runtime_error(message), code_(std::move(code)), context_(std::move(context)) {}

  const std::string& code() const noexcept { return code_; }
  const std::map<std::string, std::string>& context() const noexcept { return context_; }

 private:
  std::string code_;
  std::map<std::string, std::string> context_;
};

// Raised when a mathematical hypothesis (rather than an input format) fails.
// The CLI maps these onto exit status 2.
class HypothesisError : public Error {
 public:
  using Error::Error;
};

}  // namespace robust_t
