#include "mdml/errors.hpp"

namespace mdml {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::Dimension: return "dimension_error";
    case ErrorCode::DegenerateInput: return "degenerate_input";
    case ErrorCode::Sampling: return "sampling_error";
    case ErrorCode::Io: return "io_error";
    case ErrorCode::Format: return "format_error";
    case ErrorCode::Diverged: return "diverged";
    case ErrorCode::MissingSpecialist: return "missing_specialist";
    case ErrorCode::Internal: return "internal_error";
  }
  return "unknown_error";
}

}  // namespace mdml
