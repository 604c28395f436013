#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace usp {

/// Base class for every error raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : Error("line " + std::to_string(line) + ": " + message), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class EmptyCorpusError : public Error {
 public:
  using Error::Error;
};

class TurnTooLongError : public Error {
 public:
  TurnTooLongError(std::size_t turn_index, const std::string& message)
      : Error(message), turn_index_(turn_index) {}
  std::size_t turn_index() const { return turn_index_; }

 private:
  std::size_t turn_index_;
};

class HookFailureError : public Error {
 public:
  HookFailureError(const std::string& hook, const std::string& dialogue_id,
                   const std::string& what)
      : Error("filter hook '" + hook + "' failed on dialogue '" + dialogue_id +
              "': " + what),
        hook_(hook),
        dialogue_id_(dialogue_id) {}
  const std::string& hook() const { return hook_; }
  const std::string& dialogue_id() const { return dialogue_id_; }

 private:
  std::string hook_;
  std::string dialogue_id_;
};

/// Caller violated a documented precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// --- backend / gateway errors -------------------------------------------

class AuthError : public Error {
 public:
  using Error::Error;
};

class RateLimitedError : public Error {
 public:
  using Error::Error;
};

class TimeoutError : public Error {
 public:
  using Error::Error;
};

class BackendError : public Error {
 public:
  BackendError(int status, const std::string& body)
      : Error("backend error, status " + std::to_string(status) + ": " + body),
        status_(status),
        body_(body) {}
  explicit BackendError(const std::string& message)
      : Error(message), status_(0) {}
  int status() const { return status_; }
  const std::string& body() const { return body_; }

 private:
  int status_;
  std::string body_;
};

// --- extraction / metric errors ------------------------------------------

class SchemaParseError : public Error {
 public:
  SchemaParseError(const std::string& message, std::string raw)
      : Error(message), raw_(std::move(raw)) {}
  /// Unparsed backend output, retained for audit.
  const std::string& raw() const { return raw_; }

 private:
  std::string raw_;
};

class DuplicateCategoryError : public Error {
 public:
  using Error::Error;
};

class EmptyNarrativeError : public Error {
 public:
  using Error::Error;
};

class ExtractionError : public Error {
 public:
  using Error::Error;
};

class EmptyDecompositionError : public Error {
 public:
  using Error::Error;
};

class EmptyKeywordSetError : public Error {
 public:
  using Error::Error;
};

// --- numeric errors -------------------------------------------------------

class DegenerateCovarianceError : public Error {
 public:
  using Error::Error;
};

class ZeroVarianceError : public Error {
 public:
  using Error::Error;
};

class TooFewPointsError : public Error {
 public:
  using Error::Error;
};

}  // namespace usp
