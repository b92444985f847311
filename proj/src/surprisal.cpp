#include "synprobe/surprisal.hpp"

#include <cmath>
#include <map>
#include <numbers>

#include <fmt/format.h>

#include "synprobe/error.hpp"
#include "synprobe/text.hpp"
#include "synprobe/tree.hpp"

namespace synprobe {

std::string write_surprisal_text(const SurprisalTable& table) {
  std::string out(kSurprisalHeader);
  out += '\n';
  for (const auto& r : table) {
    for (std::size_t i = 0; i < r.tokens.size(); ++i)
      out += fmt::format("{}\t{}\t{}\t{}\n", r.sentence_id, i, r.tokens[i],
                         format_double(r.surprisals.at(i)));
  }
  return out;
}

SurprisalTable read_surprisal_text(std::string_view text) {
  const auto lines = split_lines(text);
  SurprisalTable table;
  if (lines.empty() || trim(lines.front()).empty()) return table;

  const std::string_view header = trim(lines.front());
  double scale = 1.0;
  if (header == kSurprisalHeader) {
    scale = 1.0;
  } else if (header == "#syntax-probe-surprisal v1 base=e") {
    scale = 1.0 / std::numbers::ln2;
  } else {
    throw Error(ErrorCategory::format,
                fmt::format("surprisal file: unsupported header '{}'", header));
  }

  struct Pending {
    std::size_t order;
    std::map<std::int64_t, std::pair<std::string, double>> tokens;
  };
  std::map<std::string, Pending, std::less<>> by_id;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    const std::string_view line = lines[ln];
    if (trim(line).empty()) continue;
    auto f = split(line, '\t');
    if (f.size() != 4)
      throw Error(ErrorCategory::format,
                  fmt::format("surprisal file line {}: expected 4 tab-separated fields", ln + 1));
    const std::int64_t idx = parse_int(f[1], "surprisal file", ln + 1);
    const double bits = parse_double(f[3], "surprisal file", ln + 1) * scale;
    auto [it, fresh] = by_id.try_emplace(std::string(f[0]), Pending{by_id.size(), {}});
    if (!it->second.tokens.emplace(idx, std::make_pair(std::string(f[2]), bits)).second)
      throw Error(ErrorCategory::duplicate_id,
                  fmt::format("surprisal file line {}: duplicate entry {} token {}", ln + 1, f[0],
                              idx));
  }

  table.resize(by_id.size());
  for (auto& [id, p] : by_id) {
    SurprisalRecord& r = table[p.order];
    r.sentence_id = id;
    std::int64_t expect = 0;
    for (auto& [idx, tok] : p.tokens) {
      if (idx != expect)
        throw Error(ErrorCategory::format,
                    fmt::format("surprisal file: sentence {} is missing token index {}", id, expect));
      r.tokens.push_back(std::move(tok.first));
      r.surprisals.push_back(tok.second);
      ++expect;
    }
  }
  return table;
}

SurprisalTable read_surprisal_file(const std::string& path) {
  try {
    return read_surprisal_text(read_file(path));
  } catch (const Error& e) {
    if (e.category() == ErrorCategory::io) throw;
    throw Error(e.category(), path + ": " + e.what());
  }
}

double perplexity(const SurprisalTable& table) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& r : table)
    for (double s : r.surprisals) {
      sum += s;
      ++n;
    }
  if (n == 0) throw Error(ErrorCategory::undefined_input, "perplexity: no tokens");
  return std::exp2(sum / static_cast<double>(n));
}

}  // namespace synprobe
