#pragma once

#include <stdexcept>
#include <string>

namespace contactnet {

// Precondition violated by the caller (bad dimensions, empty input, ...).
class InvalidInput : public std::invalid_argument {
 public:
  explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

// Malformed or incompatible file contents.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Every ranked action was rejected by the terrain filter.
class NoFeasibleAction : public std::runtime_error {
 public:
  explicit NoFeasibleAction(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace contactnet
