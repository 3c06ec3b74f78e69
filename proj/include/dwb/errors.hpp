#pragma once

#include <stdexcept>
#include <string>

namespace dwb {

// Invalid argument values (angles out of range, dimension mismatches).
class DomainError : public std::invalid_argument {
 public:
  explicit DomainError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Numerically rank-deficient constraint system (near-duplicate bearings).
class RankError : public std::runtime_error {
 public:
  RankError(const std::string& msg, double condition)
      : std::runtime_error(msg), condition_(condition) {}
  double condition() const { return condition_; }

 private:
  double condition_;
};

// Solver failures other than rank problems.
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& msg) : std::runtime_error(msg) {}
};

// Scenario/config file problems.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Filesystem read/write failures.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace dwb
