#pragma once

#include <stdexcept>
#include <string>

namespace gapforge {

// Error taxonomy mirrors the CLI exit codes: config_error -> 2,
// budget_error -> 3, numeric_error -> 4.
struct config_error : std::runtime_error {
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

struct budget_error : std::runtime_error {
  explicit budget_error(const std::string& what) : std::runtime_error(what) {}
};

struct numeric_error : std::runtime_error {
  explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gapforge
