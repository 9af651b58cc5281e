#pragma once

#include <stdexcept>
#include <string>

namespace roughsheet {

// Failure classes; the numeric values double as the CLI exit-code contract.
enum class ErrKind : int { config = 2, numeric = 3, io = 4 };

class Error : public std::runtime_error {
public:
  Error(ErrKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  ErrKind kind() const { return kind_; }

private:
  ErrKind kind_;
};

[[noreturn]] inline void fail_config(const std::string& msg) { throw Error(ErrKind::config, msg); }
[[noreturn]] inline void fail_numeric(const std::string& msg) { throw Error(ErrKind::numeric, msg); }
[[noreturn]] inline void fail_io(const std::string& msg) { throw Error(ErrKind::io, msg); }

}  // namespace roughsheet
