#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace ragxlate {

// Root of the library's exception hierarchy. Everything ragxlate throws
// derives from Error, so callers can catch a single type at the boundary.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input data (bad JSON line, bad numeric field, unparseable file).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Structurally valid input that violates dataset/store integrity:
// duplicate ids, code that is empty after normalization, corrupt store files.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

// A caller violated a documented precondition.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// A remote service answered, but the reply violates the wire contract
// (wrong embedding dimension, missing fields, non-JSON body).
class ContractError : public Error {
 public:
  using Error::Error;
};

// Network or IO failure that persisted through the retry budget.
class TransportError : public Error {
 public:
  using Error::Error;
};

// Numeric domain violation (zero-norm vector, empty token stream).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Comment stripping hit corrupt input (unterminated /* block).
class NormalizationError : public Error {
 public:
  using Error::Error;
};

// The query alone does not fit the prompt token budget.
class ContextOverflowError : public Error {
 public:
  using Error::Error;
};

// No code could be extracted from a model response.
class ExtractionError : public Error {
 public:
  using Error::Error;
};

// Invalid or unusable run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A pipeline stage failed; carries the stage name for diagnostics.
class PipelineError : public Error {
 public:
  PipelineError(std::string stage, const std::string& what)
      : Error("stage '" + stage + "' failed: " + what), stage_(std::move(stage)) {}

  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

}  // namespace ragxlate
