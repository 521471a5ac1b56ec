#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace erase {

enum class ErrorCode {
  Io,
  ParseError,
  DuplicateId,
  UnknownId,
  MissingEmbedding,
  DimMismatch,
  NonFiniteVector,
  NonFiniteInput,
  EmptyCorpus,
  InvalidArgument,
  InvalidK,
  TooFewExamples,
  CannotReplace,
  DeadVictim,
  StreamTooLong,
  InvalidShards,
  UndefinedBreakEven,
  DegenerateRange,
  SnapshotFormat,
};

std::string_view to_string(ErrorCode code);

// Every failure surfaced by the library carries one of the codes above; the
// message is prefixed with the code name so CLI output stays greppable.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace erase
