#pragma once

#include <stdexcept>
#include <string>

namespace cacheopt {

enum class ErrorKind {
  InvalidInput,  // malformed instance, placement or demand
  SizeGuard,     // exact enumeration or LP would be too large
  NotPopularityFirst,
  Internal,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "invalid_input";
    case ErrorKind::SizeGuard: return "size_guard";
    case ErrorKind::NotPopularityFirst: return "not_popularity_first";
    case ErrorKind::Internal: return "internal";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace cacheopt
