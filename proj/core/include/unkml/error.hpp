#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace unkml {

enum class ErrorKind {
  schema,
  parse,
  empty_input,
  insufficient_data,
  no_eligible_axis,
  config,
  fit,
  unsupported,
  io,
  internal,
};

std::string_view to_string(ErrorKind kind);

/// Single exception type for the library. The kind is stable and is what the
/// CLI reports in its machine-readable error output.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message,
        std::optional<std::size_t> row = std::nullopt)
      : std::runtime_error(message), kind_(kind), row_(row) {}

  ErrorKind kind() const noexcept { return kind_; }
  // Zero-based data row (header excluded) for CSV parse errors.
  std::optional<std::size_t> row() const noexcept { return row_; }

 private:
  ErrorKind kind_;
  std::optional<std::size_t> row_;
};

}  // namespace unkml
