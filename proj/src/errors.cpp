#include "erase/errors.hpp"

namespace erase {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Io: return "Io";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::UnknownId: return "UnknownId";
    case ErrorCode::MissingEmbedding: return "MissingEmbedding";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::NonFiniteVector: return "NonFiniteVector";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidK: return "InvalidK";
    case ErrorCode::TooFewExamples: return "TooFewExamples";
    case ErrorCode::CannotReplace: return "CannotReplace";
    case ErrorCode::DeadVictim: return "DeadVictim";
    case ErrorCode::StreamTooLong: return "StreamTooLong";
    case ErrorCode::InvalidShards: return "InvalidShards";
    case ErrorCode::UndefinedBreakEven: return "UndefinedBreakEven";
    case ErrorCode::DegenerateRange: return "DegenerateRange";
    case ErrorCode::SnapshotFormat: return "SnapshotFormat";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

}  // namespace erase
