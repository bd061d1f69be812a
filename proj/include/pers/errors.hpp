#pragma once

#include <stdexcept>
#include <string>

namespace pers {

// Error categories; the numeric value doubles as the CLI process exit code.
enum class ErrorCode : int {
  config = 2,
  io = 3,
  schema = 4,
  dangling_image_ref = 5,
  missing_artifact = 6,
  dimension = 7,
  invalid_code = 8,
  degenerate_input = 9,
  fold = 10,
  alignment = 11,
  empty_vocabulary = 12,
  insufficient_data = 13,
  non_finite = 14,
  length_mismatch = 15,
  empty_input = 16,
  internal = 20,
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::config: return "ConfigError";
    case ErrorCode::io: return "IoError";
    case ErrorCode::schema: return "SchemaError";
    case ErrorCode::dangling_image_ref: return "DanglingImageRef";
    case ErrorCode::missing_artifact: return "MissingArtifact";
    case ErrorCode::dimension: return "DimensionError";
    case ErrorCode::invalid_code: return "InvalidCode";
    case ErrorCode::degenerate_input: return "DegenerateInput";
    case ErrorCode::fold: return "FoldError";
    case ErrorCode::alignment: return "AlignmentError";
    case ErrorCode::empty_vocabulary: return "EmptyVocabulary";
    case ErrorCode::insufficient_data: return "InsufficientData";
    case ErrorCode::non_finite: return "NonFiniteInput";
    case ErrorCode::length_mismatch: return "LengthMismatch";
    case ErrorCode::empty_input: return "EmptyInput";
    case ErrorCode::internal: return "InternalError";
  }
  return "Error";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  int exit_code() const noexcept { return static_cast<int>(code_); }

 private:
  ErrorCode code_;
};

#define PERS_DEFINE_ERROR(Name, code_value)                           \
  struct Name : Error {                                               \
    explicit Name(const std::string& w) : Error(code_value, w) {}     \
  }

PERS_DEFINE_ERROR(ConfigError, ErrorCode::config);
PERS_DEFINE_ERROR(IoError, ErrorCode::io);
PERS_DEFINE_ERROR(SchemaError, ErrorCode::schema);
PERS_DEFINE_ERROR(DanglingImageRef, ErrorCode::dangling_image_ref);
PERS_DEFINE_ERROR(MissingArtifact, ErrorCode::missing_artifact);
PERS_DEFINE_ERROR(DimensionError, ErrorCode::dimension);
PERS_DEFINE_ERROR(InvalidCode, ErrorCode::invalid_code);
PERS_DEFINE_ERROR(DegenerateInput, ErrorCode::degenerate_input);
PERS_DEFINE_ERROR(FoldError, ErrorCode::fold);
PERS_DEFINE_ERROR(AlignmentError, ErrorCode::alignment);
PERS_DEFINE_ERROR(EmptyVocabulary, ErrorCode::empty_vocabulary);
PERS_DEFINE_ERROR(InsufficientData, ErrorCode::insufficient_data);
PERS_DEFINE_ERROR(NonFiniteInput, ErrorCode::non_finite);
PERS_DEFINE_ERROR(LengthMismatch, ErrorCode::length_mismatch);
PERS_DEFINE_ERROR(EmptyInput, ErrorCode::empty_input);

#undef PERS_DEFINE_ERROR

}  // namespace pers
