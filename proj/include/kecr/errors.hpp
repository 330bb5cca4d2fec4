// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kecr {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file. `line()` is 1-based, 0 when not line oriented.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class RejectedRelationError : public Error {
 public:
  RejectedRelationError(const std::string& relation, std::size_t line)
      : Error("relation '" + relation + "' is not in the retained set (line " +
              std::to_string(line) + ")"),
        relation_(relation) {}
  const std::string& relation() const noexcept { return relation_; }

 private:
  std::string relation_;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class SamplingError : public Error {
 public:
  using Error::Error;
};

class EmptyBeliefError : public Error {
 public:
  EmptyBeliefError() : Error("belief state is empty") {}
};

class NoNeighborsError : public Error {
 public:
  using Error::Error;
};

class NoPathError : public Error {
 public:
  using Error::Error;
};

class CannotStartError : public Error {
 public:
  CannotStartError() : Error("no mentioned entity and no category entity to start reasoning from") {}
};

class RealizationError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace kecr
