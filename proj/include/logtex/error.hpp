#pragma once

#include <stdexcept>
#include <string>

namespace logtex {

enum class ErrorKind {
  // corpus
  MissingContentField,
  DuplicateFieldName,
  IoError,
  HeaderMismatch,
  NoMatch,
  // sampler
  KTooLarge,
  InvalidTemplate,
  // tokenizer
  VocabTooSmall,
  UnknownId,
  // encoder
  InvalidConfig,
  SequenceTooLong,
  OutOfRange,
  DimensionMismatch,
  // vtoken
  NoParameterPositions,
  EmptySelection,
  // trainer
  MisalignedExtraction,
  ShapeMismatch,
  ParamTokenMissing,
  // parser
  ModelNotTrained,
  // metrics
  KeyMismatch,
  // synth
  InvalidSpec,
  // cli / persistence
  MissingArtifact,
  ConfigError,
  ValidationError,
  VersionMismatch,
  CorruptContainer,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

  // CLI exit code contract: 0 success, 2 config, 3 missing artifact, 4 validation.
  int exit_code() const {
    switch (kind_) {
      case ErrorKind::ConfigError:
      case ErrorKind::InvalidConfig:
        return 2;
      case ErrorKind::MissingArtifact:
      case ErrorKind::IoError:
        return 3;
      case ErrorKind::InvalidTemplate:
      case ErrorKind::ValidationError:
      case ErrorKind::KTooLarge:
        return 4;
      default:
        return 1;
    }
  }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace logtex
