#include "synprobe/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <unordered_map>

#include <fmt/format.h>

#include "synprobe/error.hpp"
#include "synprobe/text.hpp"

namespace synprobe {

double region_surprisal(const Sentence& sentence, const SurprisalRecord& record) {
  const auto& a = sentence.tokens;
  const auto& b = record.tokens;
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i)
    if (a[i] != b[i])
      throw AlignmentError(record.sentence_id, i,
                           fmt::format("{}: token {} is '{}', suite has '{}'", record.sentence_id, i, b[i], a[i]));
  if (a.size() != b.size())
    throw AlignmentError(record.sentence_id, n,
                         fmt::format("{}: record has {} tokens, suite has {}", record.sentence_id, b.size(), a.size()));
  if (record.surprisals.size() != b.size())
    throw AlignmentError(record.sentence_id, std::min(record.surprisals.size(), b.size()),
                         fmt::format("{}: {} surprisals for {} tokens", record.sentence_id,
                                     record.surprisals.size(), b.size()));
  if (sentence.region_start >= sentence.region_end || sentence.region_end > a.size())
    throw Error(ErrorCategory::format, fmt::format("{}: region [{}, {}) invalid for {} tokens", record.sentence_id,
                                                   sentence.region_start, sentence.region_end, a.size()));
  double sum = 0.0;
  for (std::size_t i = sentence.region_start; i < sentence.region_end; ++i) sum += record.surprisals[i];
  return sum;
}

int item_accuracy(double gram_bits, double ungram_bits, double epsilon_tie) {
  if (!std::isfinite(gram_bits) || !std::isfinite(ungram_bits))
    throw Error(ErrorCategory::numeric,
                fmt::format("non-finite region surprisal ({}, {})", gram_bits, ungram_bits));
  return gram_bits < ungram_bits - epsilon_tie ? 1 : 0;
}

std::vector<AlignedItem> align(const TestSuite& suite, const SurprisalTable& records) {
  std::unordered_map<std::string, const SurprisalRecord*> by_id;
  by_id.reserve(records.size());
  for (const auto& r : records)
    if (!by_id.emplace(r.sentence_id, &r).second)
      throw Error(ErrorCategory::duplicate_id, fmt::format("duplicate sentence_id '{}'", r.sentence_id));

  std::unordered_map<std::string, bool> known;
  known.reserve(2 * suite.items.size());
  for (const auto& item : suite.items) {
    known.emplace(item.sentence_id(true), true);
    known.emplace(item.sentence_id(false), false);
  }
  for (const auto& r : records)
    if (!known.count(r.sentence_id))
      throw Error(ErrorCategory::unknown_id,
                  fmt::format("sentence_id '{}' is not in suite '{}'", r.sentence_id, suite.suite_id));

  std::vector<AlignedItem> out;
  std::vector<std::string> missing;
  for (const auto& item : suite.items) {
    AlignedItem a{&item, nullptr, nullptr};
    for (bool g : {true, false}) {
      const auto id = item.sentence_id(g);
      auto it = by_id.find(id);
      if (it == by_id.end()) {
        missing.push_back(id);
        continue;
      }
      (g ? a.grammatical : a.ungrammatical) = it->second;
      region_surprisal(g ? item.grammatical : item.ungrammatical, *it->second);
    }
    out.push_back(a);
  }
  if (!missing.empty()) {
    const std::size_t shown = std::min<std::size_t>(missing.size(), 5);
    std::vector<std::string> head(missing.begin(), missing.begin() + static_cast<std::ptrdiff_t>(shown));
    throw Error(ErrorCategory::incomplete,
                fmt::format("{} suite sentences have no surprisal record: {}{}", missing.size(), join(head, ", "),
                            missing.size() > shown ? ", ..." : ""));
  }
  return out;
}

std::vector<ItemResult> score_items(const TestSuite& suite, const SurprisalTable& records, double epsilon_tie) {
  std::vector<ItemResult> out;
  for (const auto& a : align(suite, records)) {
    const TestItem& item = *a.item;
    ItemResult r;
    r.item_id = item.item_id;
    r.target = item.target;
    r.category = item.category;
    r.bucket = item.bucket;
    r.exposure = item.exposure;
    r.frame = item.frame;
    r.grammatical_bits = region_surprisal(item.grammatical, *a.grammatical);
    r.ungrammatical_bits = region_surprisal(item.ungrammatical, *a.ungrammatical);
    r.correct = item_accuracy(r.grammatical_bits, r.ungrammatical_bits, epsilon_tie);
    out.push_back(std::move(r));
  }
  return out;
}

EvalResult aggregate(const TestSuite& suite, std::vector<ItemResult> items, std::string_view model, double level) {
  std::unordered_map<std::string, std::size_t> by_id;
  for (std::size_t i = 0; i < items.size(); ++i)
    if (!by_id.emplace(items[i].item_id, i).second)
      throw Error(ErrorCategory::duplicate_id, fmt::format("duplicate result for item '{}'", items[i].item_id));
  std::vector<std::string> missing;
  for (const auto& item : suite.items)
    if (!by_id.count(item.item_id)) missing.push_back(item.item_id);
  if (!missing.empty())
    throw Error(ErrorCategory::incomplete,
                fmt::format("{} items have no result, first '{}'", missing.size(), missing.front()));
  if (items.size() != suite.items.size())
    throw Error(ErrorCategory::unknown_id, "results include items that are not in the suite");

  std::vector<int> buckets = suite.provenance.buckets;
  for (const auto& r : items)
    if (std::find(buckets.begin(), buckets.end(), r.bucket) == buckets.end()) buckets.push_back(r.bucket);
  const std::vector<Category> cats = suite.family == SuiteFamily::number
                                         ? std::vector{Category::singular, Category::plural}
                                         : std::vector{Category::transitive, Category::intransitive};

  EvalResult result;
  auto emit = [&](std::optional<int> bucket, std::optional<Category> cat) {
    std::int64_t n = 0, k = 0;
    for (const auto& r : items) {
      if (bucket && r.bucket != *bucket) continue;
      if (cat && r.category != *cat) continue;
      ++n;
      k += r.correct;
    }
    if (n == 0) return;
    result.rows.push_back({suite.suite_id, std::string(model), bucket ? std::to_string(*bucket) : "all",
                           cat ? std::string(to_string(*cat)) : "all", summarize_binomial(k, n, level)});
  };
  for (int b : buckets) {
    for (Category c : cats) emit(b, c);
    emit(b, std::nullopt);
  }
  for (Category c : cats) emit(std::nullopt, c);
  emit(std::nullopt, std::nullopt);

  // Items in suite order.
  result.items.reserve(items.size());
  for (const auto& item : suite.items) result.items.push_back(std::move(items[by_id.at(item.item_id)]));
  return result;
}

std::string write_eval_csv(const EvalResult& result) {
  std::string out(kEvalHeader);
  out += '\n';
  for (const auto& r : result.rows) {
    const auto& s = r.summary;
    out += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", r.suite, r.model, r.bucket, r.category, s.n, s.k,
                       format_double(s.accuracy), format_double(s.ci_lo), format_double(s.ci_hi),
                       format_double(s.p_above_chance));
  }
  return out;
}

std::string write_items_csv(const EvalResult& result) {
  std::string out(kItemsHeader);
  out += '\n';
  const std::string suite = result.rows.empty() ? "" : result.rows.front().suite;
  const std::string model = result.rows.empty() ? "" : result.rows.front().model;
  for (const auto& r : result.items)
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", suite, model, r.item_id, r.target,
                       to_string(r.category), r.bucket, r.exposure, r.frame, format_double(r.grammatical_bits),
                       format_double(r.ungrammatical_bits), r.correct);
  return out;
}

namespace {

std::vector<std::vector<std::string_view>> csv_rows(std::string_view text, std::string_view header,
                                                    std::string_view what) {
  const auto lines = split_lines(text);
  if (lines.empty() || lines.front() != header)
    throw Error(ErrorCategory::format, fmt::format("{}: expected header '{}'", what, header));
  const std::size_t width = split(header, ',').size();
  std::vector<std::vector<std::string_view>> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto f = split(lines[i], ',');
    if (f.size() != width)
      throw Error(ErrorCategory::format,
                  fmt::format("{} line {}: {} fields, expected {}", what, i + 1, f.size(), width));
    rows.push_back(std::move(f));
  }
  return rows;
}

}  // namespace

std::vector<EvalRow> read_eval_csv(std::string_view text) {
  std::vector<EvalRow> out;
  std::size_t line = 1;
  for (const auto& f : csv_rows(text, kEvalHeader, "eval csv")) {
    ++line;
    EvalRow r{std::string(f[0]), std::string(f[1]), std::string(f[2]), std::string(f[3]), {}};
    r.summary.n = parse_int(f[4], "eval csv", line);
    r.summary.k = parse_int(f[5], "eval csv", line);
    r.summary.accuracy = parse_double(f[6], "eval csv", line);
    r.summary.ci_lo = parse_double(f[7], "eval csv", line);
    r.summary.ci_hi = parse_double(f[8], "eval csv", line);
    r.summary.p_above_chance = parse_double(f[9], "eval csv", line);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<ItemRow> read_items_csv(std::string_view text) {
  std::vector<ItemRow> out;
  std::size_t line = 1;
  for (const auto& f : csv_rows(text, kItemsHeader, "items csv")) {
    ++line;
    ItemRow r{std::string(f[0]), std::string(f[1]), {}};
    auto& x = r.result;
    x.item_id = f[2];
    x.target = f[3];
    x.category = parse_category(f[4]);
    x.bucket = static_cast<int>(parse_int(f[5], "items csv", line));
    x.exposure = parse_int(f[6], "items csv", line);
    x.frame = static_cast<int>(parse_int(f[7], "items csv", line));
    x.grammatical_bits = parse_double(f[8], "items csv", line);
    x.ungrammatical_bits = parse_double(f[9], "items csv", line);
    x.correct = static_cast<int>(parse_int(f[10], "items csv", line));
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace synprobe
