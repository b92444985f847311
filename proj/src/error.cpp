#include "synprobe/error.hpp"

namespace synprobe {

std::string_view category_token(ErrorCategory c) noexcept {
  switch (c) {
    case ErrorCategory::usage: return "usage";
    case ErrorCategory::io: return "io";
    case ErrorCategory::parse: return "parse";
    case ErrorCategory::format: return "format";
    case ErrorCategory::undefined_input: return "undefined-input";
    case ErrorCategory::training: return "training";
    case ErrorCategory::generation: return "generation";
    case ErrorCategory::alignment: return "alignment";
    case ErrorCategory::duplicate_id: return "duplicate-id";
    case ErrorCategory::unknown_id: return "unknown-id";
    case ErrorCategory::incomplete: return "incomplete";
    case ErrorCategory::search: return "search";
    case ErrorCategory::oracle_infeasible: return "oracle-infeasible";
    case ErrorCategory::numeric: return "numeric";
    case ErrorCategory::separation: return "separation";
    case ErrorCategory::rank: return "rank";
    case ErrorCategory::protocol: return "protocol";
  }
  return "unknown";
}

int exit_code(ErrorCategory c) noexcept {
  switch (c) {
    case ErrorCategory::usage: return 2;
    case ErrorCategory::io: return 3;
    case ErrorCategory::parse:
    case ErrorCategory::format: return 4;
    case ErrorCategory::alignment:
    case ErrorCategory::duplicate_id:
    case ErrorCategory::unknown_id:
    case ErrorCategory::incomplete: return 5;
    case ErrorCategory::generation: return 6;
    default: return 1;
  }
}

}  // namespace synprobe
