#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "synprobe/lexicon.hpp"

namespace synprobe {

enum class SuiteFamily { number, argstruct };

// How the grammatical and ungrammatical sentences of an item differ.
enum class ConditionRule {
  agreement_swap,      // number-agreeing verb after the subject
  auxiliary_swap,      // sentence-initial auxiliary of a polar question
  object_deletion,     // direct object present or absent
  auxiliary_deletion,  // passive auxiliary present or absent
};

enum class TargetFilter { polar_overlap, same_participle, active_only };

enum class Category { singular, plural, transitive, intransitive };

std::string_view to_string(SuiteFamily f) noexcept;
std::string_view to_string(ConditionRule r) noexcept;
std::string_view to_string(TargetFilter f) noexcept;
std::string_view to_string(Category c) noexcept;
SuiteFamily parse_family(std::string_view s);
ConditionRule parse_rule(std::string_view s);
TargetFilter parse_filter(std::string_view s);
Category parse_category(std::string_view s);

struct Slot {
  enum class Kind { literal, target, agree, filler, region_begin, region_end, optional_begin, optional_end };
  Kind kind;
  std::string text;  // literal token or inventory name
};

/// One test suite's sentence frame. Frame syntax: whitespace-separated
/// tokens; `<target>` is the target word, `<agree>` the swapped form of a
/// swap rule, `<name>` a phrase drawn from inventory `name`, `[ ... ]` the
/// critical region and `( ... )` the span present in only one condition of
/// a deletion rule.
struct Template {
  std::string id;
  SuiteFamily family = SuiteFamily::number;
  ConditionRule rule = ConditionRule::agreement_swap;
  std::string frame_text;
  std::vector<Slot> frame;
  // (singular form, plural form); frame f uses pairs[f % size].
  std::vector<std::pair<std::string, std::string>> pairs;
  std::string target_tag;  // argstruct: tag the target form must carry
  std::vector<TargetFilter> filters;

  std::vector<Category> categories() const;
  std::vector<std::string> filler_slots() const;
};

struct SuiteDefinition {
  std::map<std::string, std::vector<std::string>> inventories;  // phrases
  std::vector<Template> suites;

  const Template& find(std::string_view id) const;
  // Every token that can appear in a sentence of `t` other than the target.
  std::set<std::string> fixed_tokens(const Template& t) const;
};

SuiteDefinition parse_suite_definition(std::string_view yaml_text);
SuiteDefinition read_suite_definition(const std::string& path);

struct Sentence {
  std::vector<std::string> tokens;
  std::size_t region_start = 0;  // half-open [start, end)
  std::size_t region_end = 0;

  friend bool operator==(const Sentence&, const Sentence&) = default;
};

struct TestItem {
  std::string item_id;
  std::string suite_id;
  std::string target;
  Category category = Category::singular;
  int bucket = 0;
  std::int64_t exposure = 0;
  int frame = 0;
  Sentence grammatical;
  Sentence ungrammatical;

  std::string sentence_id(bool grammatical_condition) const;
  friend bool operator==(const TestItem&, const TestItem&) = default;
};

struct Provenance {
  std::string corpus_hash;
  std::uint64_t seed = 0;
  std::size_t words_per_category = 0;
  std::size_t frames_per_word = 0;
  std::vector<int> buckets;
  std::int64_t filler_min_count = 0;
  std::vector<std::string> shortfalls;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct TestSuite {
  std::string suite_id;
  SuiteFamily family = SuiteFamily::number;
  ConditionRule rule = ConditionRule::agreement_swap;
  std::vector<TargetFilter> filters;
  std::vector<TestItem> items;
  Provenance provenance;

  std::size_t sentence_count() const noexcept { return 2 * items.size(); }
  friend bool operator==(const TestSuite&, const TestSuite&) = default;
};

struct GenerationParams {
  std::size_t words_per_category = 20;
  std::size_t frames_per_word = 20;
  std::vector<int> buckets{2, 3, 4, 5, 10, 20, 30, 100};
  std::int64_t filler_min_count = 50;
};

struct GenerationContext {
  const LexiconStats* lex = nullptr;
  std::map<std::string, TransitivityDecision> transitivity;
  std::set<std::string> distinct_participle;
  std::string corpus_hash;
};

/// Sorted candidates for (template, category, bucket): right tag and
/// category, count inside the bucket, passing the template's filters, and
/// not a token of the template's own frame or fillers.
std::vector<std::string> candidate_pool(const SuiteDefinition& def, const Template& t,
                                        const GenerationContext& ctx, Category category, int bucket);

/// min(n, |pool|) distinct words drawn uniformly without replacement,
/// returned sorted. Appends a shortfall warning when |pool| < n; throws
/// Error(generation) naming `label` when the pool is empty.
std::vector<std::string> sample_targets(const std::vector<std::string>& pool, std::size_t n,
                                        std::uint64_t seed, std::string_view label,
                                        std::vector<std::string>* warnings = nullptr);

struct FrameChoice {
  std::size_t pair = 0;
  std::vector<std::string> fillers;  // one phrase per filler slot, frame order
};

FrameChoice choose_frame(const SuiteDefinition& def, const Template& t, std::string_view target,
                         int frame, std::uint64_t seed);

/// Token list and region for one condition. With a lexicon, every
/// non-target token must occur at least `min_count` times; otherwise
/// Error(generation) lists the offending tokens.
Sentence instantiate(const Template& t, std::string_view target, Category category,
                     const FrameChoice& choice, bool grammatical,
                     const LexiconStats* lex = nullptr, std::int64_t min_count = 50);

/// Deterministic in (definition, lexicon, params, seed). Buckets with too
/// few candidates are generated short and recorded in provenance; an empty
/// suite is an Error(generation).
TestSuite generate_suite(const SuiteDefinition& def, const Template& t, const GenerationContext& ctx,
                         const GenerationParams& params, std::uint64_t seed,
                         std::vector<std::string>* warnings = nullptr);

struct Violation {
  std::string item_id;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  std::vector<std::string> warnings;  // category imbalance
  bool ok() const noexcept { return violations.empty(); }
};

/// Reports at most one violation per item plus suite-level warnings.
ValidationReport validate_suite(const TestSuite& suite, const LexiconStats& lex,
                                std::int64_t filler_min_count = 50);

/// Line-delimited JSON: a header record, then one record per item and
/// condition. Byte-identical for equal suites.
std::string write_suite_jsonl(const TestSuite& suite);
TestSuite read_suite_jsonl(std::string_view text);
TestSuite read_suite_file(const std::string& path);

}  // namespace synprobe
