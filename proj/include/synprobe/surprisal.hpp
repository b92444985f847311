#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace synprobe {

/// Per-token surprisals (bits) for one sentence.
struct SurprisalRecord {
  std::string sentence_id;
  std::vector<std::string> tokens;
  std::vector<double> surprisals;
};

using SurprisalTable = std::vector<SurprisalRecord>;

inline constexpr std::string_view kSurprisalHeader = "#syntax-probe-surprisal v1 base=2";

/// Adapter format: header line, then `sentence_id<TAB>token_index<TAB>token<TAB>surprisal`
/// per token, token_index 0-based. Records are written in table order.
std::string write_surprisal_text(const SurprisalTable& table);

/// Accepts `base=2` or `base=e` (converted to bits). Records are returned in
/// order of first appearance. A repeated (sentence_id, token_index) pair is an
/// Error(duplicate_id); gaps in token indices are Error(format).
SurprisalTable read_surprisal_text(std::string_view text);
SurprisalTable read_surprisal_file(const std::string& path);

/// 2^(mean surprisal) over every token of every record.
double perplexity(const SurprisalTable& table);

}  // namespace synprobe
