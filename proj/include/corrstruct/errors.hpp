#pragma once

#include <stdexcept>
#include <string>

namespace corrstruct {

// Error taxonomy shared by the library and the CLI exit-code mapping:
// input problems (Io/Format/Domain), resource limits (Capacity), and
// numerical failures such as divergence or spectral degeneracy (Numerical).
enum class ErrorKind { Io, Format, Domain, Capacity, Numerical };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct IoError : Error {
  explicit IoError(const std::string& msg) : Error(ErrorKind::Io, msg) {}
};
struct FormatError : Error {
  explicit FormatError(const std::string& msg) : Error(ErrorKind::Format, msg) {}
};
struct DomainError : Error {
  explicit DomainError(const std::string& msg) : Error(ErrorKind::Domain, msg) {}
};
struct CapacityError : Error {
  explicit CapacityError(const std::string& msg) : Error(ErrorKind::Capacity, msg) {}
};
struct NumericalError : Error {
  explicit NumericalError(const std::string& msg) : Error(ErrorKind::Numerical, msg) {}
};

inline const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::Io: return "io";
    case ErrorKind::Format: return "format";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Capacity: return "capacity";
    case ErrorKind::Numerical: return "numerical";
  }
  return "unknown";
}

}  // namespace corrstruct
