#pragma once

#include <stdexcept>
#include <string>

namespace abscloze {

// Base of every error raised by the library. Callers that only care about
// "did it work" catch this; the subclasses carry the failure category.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed record in an input file. The message names file and line.
class ParseError : public Error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what),
        file_(file),
        line_(line) {}

  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

// A pointer or index entry refers to a synset that does not exist.
class LinkError : public Error {
 public:
  using Error::Error;
};

class LookupError : public Error {
 public:
  using Error::Error;
};

class NoSenseError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Backend unreachable, timed out, or answered with an error status.
class TransportError : public Error {
 public:
  TransportError(const std::string& what, int status = 0)
      : Error(what), status_(status) {}

  // HTTP status when the server answered, 0 for connection-level failures.
  int status() const { return status_; }

 private:
  int status_;
};

class CapabilityError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class EmptyOptionError : public Error {
 public:
  using Error::Error;
};

class MalformedSampleError : public Error {
 public:
  using Error::Error;
};

class QuestionOverflowError : public Error {
 public:
  using Error::Error;
};

class EvaluationError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace abscloze
