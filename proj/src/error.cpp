#include "logtex/error.hpp"

namespace logtex {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MissingContentField: return "MissingContentField";
    case ErrorKind::DuplicateFieldName: return "DuplicateFieldName";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::HeaderMismatch: return "HeaderMismatch";
    case ErrorKind::NoMatch: return "NoMatch";
    case ErrorKind::KTooLarge: return "KTooLarge";
    case ErrorKind::InvalidTemplate: return "InvalidTemplate";
    case ErrorKind::VocabTooSmall: return "VocabTooSmall";
    case ErrorKind::UnknownId: return "UnknownId";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::SequenceTooLong: return "SequenceTooLong";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NoParameterPositions: return "NoParameterPositions";
    case ErrorKind::EmptySelection: return "EmptySelection";
    case ErrorKind::MisalignedExtraction: return "MisalignedExtraction";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::ParamTokenMissing: return "ParamTokenMissing";
    case ErrorKind::ModelNotTrained: return "ModelNotTrained";
    case ErrorKind::KeyMismatch: return "KeyMismatch";
    case ErrorKind::InvalidSpec: return "InvalidSpec";
    case ErrorKind::MissingArtifact: return "MissingArtifact";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::ValidationError: return "ValidationError";
    case ErrorKind::VersionMismatch: return "VersionMismatch";
    case ErrorKind::CorruptContainer: return "CorruptContainer";
  }
  return "Error";
}

}  // namespace logtex
