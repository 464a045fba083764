#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace slotbench {

// Error taxonomy shared across the library. The CLI maps these onto exit
// codes: usage errors are handled by the parser, ConfigError -> 2, the
// rest -> 3.
struct ShapeError : std::runtime_error {
  explicit ShapeError(const std::string& msg) : std::runtime_error("shape error: " + msg) {}
};

struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error("numeric error: " + msg) {}
};

struct FormatError : std::runtime_error {
  FormatError(const std::string& msg, std::uint64_t byte_offset)
      : std::runtime_error("format error at byte " + std::to_string(byte_offset) + ": " + msg),
        offset(byte_offset) {}
  std::uint64_t offset;
};

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error("config error: " + msg) {}
};

struct InvalidInput : std::runtime_error {
  explicit InvalidInput(const std::string& msg) : std::runtime_error("invalid input: " + msg) {}
};

struct ContractError : std::runtime_error {
  explicit ContractError(const std::string& msg) : std::runtime_error("contract violation: " + msg) {}
};

}  // namespace slotbench
