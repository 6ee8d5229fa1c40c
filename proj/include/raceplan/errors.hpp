#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace raceplan {

/// Bad or unusable input (files, parameters, request state). Maps to CLI exit code 3.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public InputError {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : InputError(file + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class GeometryError : public InputError {
 public:
  using InputError::InputError;
};

class SplineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Graph file failures. Each has its own type so callers can tell them apart.
class GraphFileError : public InputError {
 public:
  using InputError::InputError;
};
class GraphVersionError : public GraphFileError {
 public:
  using GraphFileError::GraphFileError;
};
class GraphHashError : public GraphFileError {
 public:
  using GraphFileError::GraphFileError;
};
class GraphTruncatedError : public GraphFileError {
 public:
  using GraphFileError::GraphFileError;
};

class UntraversableError : public InputError {
 public:
  UntraversableError() : InputError("track untraversable with given params") {}
};

class NoFeasibleStartError : public InputError {
 public:
  explicit NoFeasibleStartError(const std::string& what = "no feasible start") : InputError(what) {}
};

}  // namespace raceplan
