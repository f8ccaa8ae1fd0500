#pragma once

#include <stdexcept>
#include <string>

namespace streamlink {

// Base of every exception the library throws. `code()` is a stable,
// machine-readable name such as "SyntaxError" or "UnknownColumn".
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

}  // namespace streamlink
