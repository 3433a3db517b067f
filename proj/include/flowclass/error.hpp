#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

namespace flowclass {

/// Machine-readable failure category shared by every layer. The gateway maps
/// each code onto a transport status (see PROTOCOL.md).
enum class ErrorCode {
  invalid_argument,
  out_of_bounds,
  not_found,
  invalid_edge,
  duplicate_edge,
  malformed_path,
  decode_error,
  invalid_reference,
  access_denied,
  unauthorized,
  unavailable,
  wrong_state,
  order_violation,
  payload_too_large,
  storage_failure,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, nlohmann::json details = nullptr)
      : std::runtime_error(message), code_(code), details_(std::move(details)) {}

  ErrorCode code() const noexcept { return code_; }
  const nlohmann::json& details() const noexcept { return details_; }

 private:
  ErrorCode code_;
  nlohmann::json details_;
};

}  // namespace flowclass
