#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace nlspec {

/// Precondition or usage failure raised by any module.
///
/// Carries the name of the module that detected it and the name of the
/// violated contract, so command-line front ends can report both.
class Error : public std::runtime_error {
 public:
  Error(std::string module, std::string invariant, const std::string& message)
      : std::runtime_error(module + ": " + invariant + ": " + message),
        module_(std::move(module)),
        invariant_(std::move(invariant)) {}

  const std::string& module() const noexcept { return module_; }
  const std::string& invariant() const noexcept { return invariant_; }

 private:
  std::string module_;
  std::string invariant_;
};

/// Outcome of one named invariant evaluated by an experiment.
struct Check {
  std::string module;
  std::string name;
  bool passed = true;
  std::string detail;
};

}  // namespace nlspec
