// Copyright 2026 The irasep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef IRASEP_ERROR_H_
#define IRASEP_ERROR_H_

#include <stdexcept>
#include <string>

namespace irasep {

// Every failure raised by the library carries a short machine-readable code
// ("io", "format", "invalid_argument", "config", "diverged", ...) next to the
// human-readable message. The CLI prints both on one line.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

}  // namespace irasep

#endif  // IRASEP_ERROR_H_
