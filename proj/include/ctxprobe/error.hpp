#pragma once

#include <stdexcept>
#include <string>

namespace ctxprobe {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad configuration or arguments; the CLI maps it to exit status 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Tag stream and document disagree on word count or word text.
class AlignmentError : public Error {
 public:
  AlignmentError(std::size_t index, const std::string& what)
      : Error("alignment error at word " + std::to_string(index) + ": " + what), index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

/// A keyed lookup into a record store missed.
class NotFoundError : public Error {
 public:
  using Error::Error;
};

/// Input data violates a declared invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Spearman is undefined when one side has no variation.
class UndefinedCorrelation : public Error {
 public:
  using Error::Error;
};

}  // namespace ctxprobe
