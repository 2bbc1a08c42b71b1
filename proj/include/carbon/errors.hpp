#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace carbon {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class MarginalMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidDimension : public Error {
 public:
  using Error::Error;
};

class EmptyGeneratorSet : public Error {
 public:
  using Error::Error;
};

class UnknownConsumer : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

enum class SolveFailure { Infeasible, IterationLimit, Internal };

class SolveError : public Error {
 public:
  SolveError(SolveFailure kind, const std::string& what)
      : Error(what), kind_(kind) {}
  SolveFailure kind() const { return kind_; }

 private:
  SolveFailure kind_;
};

enum class IssueCode {
  DuplicateId,
  UnknownBus,
  NoReferenceBus,
  MultipleReferenceBuses,
  NegativeBound,
  InvertedBounds,
  InfeasibleAggregateBounds,
  SelfLoop,
  NonpositiveSusceptance,
  NonFiniteValue,
  Disconnected,
};

const char* issue_code_name(IssueCode code);

struct ValidationIssue {
  IssueCode code;
  std::string id;       // offending element id (may be empty for case-level issues)
  std::string message;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<ValidationIssue> issues);
  const std::vector<ValidationIssue>& issues() const { return issues_; }

 private:
  std::vector<ValidationIssue> issues_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::string location)
      : Error(what + " (" + location + ")"), location_(std::move(location)) {}
  const std::string& location() const { return location_; }

 private:
  std::string location_;
};

}  // namespace carbon
