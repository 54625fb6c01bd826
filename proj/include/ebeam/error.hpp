#pragma once

#include <stdexcept>
#include <string>

namespace ebeam {

enum class ErrorKind {
  domain,
  config,
  validity,
  non_convergence,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct DomainError : Error {
  explicit DomainError(const std::string& what) : Error(ErrorKind::domain, what) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

// A named physical condition was violated (overtaking, window overlap, ...).
struct ValidityError : Error {
  ValidityError(std::string condition, const std::string& what)
      : Error(ErrorKind::validity, what), condition_(std::move(condition)) {}
  const std::string& condition() const noexcept { return condition_; }

 private:
  std::string condition_;
};

struct ConvergenceError : Error {
  ConvergenceError(const std::string& what, double last_good)
      : Error(ErrorKind::non_convergence, what), last_good_(last_good) {}
  // Last accepted abscissa (time for ODEs, partial value for quadrature).
  double last_good() const noexcept { return last_good_; }

 private:
  double last_good_;
};

}  // namespace ebeam
