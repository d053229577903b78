#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace fedshield {

enum class ErrorKind {
  InvalidArgument,
  InvalidDataset,
  FormatError,
  DimensionMismatch,
  NonFiniteValue,
  EmptyDataset,
  SingleClassData,
  InfeasibleSpec,
  EmptyUpdateSet,
  TestSetMismatch,
  MalformedFrame,
  UnknownKind,
  OversizeFrame,
  ClientTimeout,
  DuplicateUpdate,
  ProtocolViolation,
  ConnectionLost,
  IoError,
};

namespace detail {
inline constexpr std::array<std::string_view, 18> kErrorKindNames = {
    "InvalidArgument",  "InvalidDataset",    "FormatError",    "DimensionMismatch",
    "NonFiniteValue",   "EmptyDataset",      "SingleClassData", "InfeasibleSpec",
    "EmptyUpdateSet",   "TestSetMismatch",   "MalformedFrame", "UnknownKind",
    "OversizeFrame",    "ClientTimeout",     "DuplicateUpdate", "ProtocolViolation",
    "ConnectionLost",   "IoError",
};
}  // namespace detail

constexpr std::string_view to_string(ErrorKind kind) {
  return detail::kErrorKindNames[static_cast<std::size_t>(kind)];
}

inline std::optional<ErrorKind> error_kind_from_string(std::string_view name) {
  for (std::size_t i = 0; i < detail::kErrorKindNames.size(); ++i) {
    if (detail::kErrorKindNames[i] == name) return static_cast<ErrorKind>(i);
  }
  return std::nullopt;
}

/// Every failure raised by the library carries one of the kinds above so
/// that callers (and the CLI exit-code table) can dispatch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Process exit codes shared by the CLI and the network roles.
inline constexpr int kExitOk = 0;
inline constexpr int kExitProtocol = 2;
inline constexpr int kExitTimeout = 3;
inline constexpr int kExitData = 4;
inline constexpr int kExitUsage = 64;

constexpr int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MalformedFrame:
    case ErrorKind::UnknownKind:
    case ErrorKind::OversizeFrame:
    case ErrorKind::DuplicateUpdate:
    case ErrorKind::ProtocolViolation:
      return kExitProtocol;
    case ErrorKind::ClientTimeout:
      return kExitTimeout;
    case ErrorKind::InvalidArgument:
      return kExitUsage;
    default:
      return kExitData;
  }
}

}  // namespace fedshield
