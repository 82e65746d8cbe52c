#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace actfx {

/// Error with a stable machine-readable code ("syntax-error", "capacity", ...)
/// plus a human-readable message. Parse errors also carry a byte offset.
class Error : public std::runtime_error {
public:
  static constexpr std::size_t kNoOffset = static_cast<std::size_t>(-1);

  Error(std::string code, const std::string& message,
        std::size_t offset = kNoOffset)
      : std::runtime_error(message), code_(std::move(code)), offset_(offset) {}

  const std::string& code() const { return code_; }
  std::size_t offset() const { return offset_; }

private:
  std::string code_;
  std::size_t offset_;
};

}  // namespace actfx
