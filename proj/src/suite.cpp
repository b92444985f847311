#include "synprobe/suite.hpp"

#include <algorithm>
#include <optional>

#include <fmt/format.h>
#include "json.hpp"
#include <yaml-cpp/yaml.h>

#include "synprobe/error.hpp"
#include "synprobe/exposure.hpp"
#include "synprobe/random.hpp"
#include "synprobe/text.hpp"
#include "synprobe/tree.hpp"

namespace synprobe {

namespace {

template <typename E, std::size_t N>
E parse_enum(std::string_view s, const std::array<E, N>& values, std::string_view what) {
  for (E v : values)
    if (to_string(v) == s) return v;
  throw Error(ErrorCategory::format, fmt::format("unknown {} '{}'", what, s));
}

bool is_swap(ConditionRule r) {
  return r == ConditionRule::agreement_swap || r == ConditionRule::auxiliary_swap;
}

bool is_plain_word(std::string_view w) {
  if (w.empty() || w.front() < 'a' || w.front() > 'z') return false;
  return std::all_of(w.begin(), w.end(),
                     [](char c) { return (c >= 'a' && c <= 'z') || c == '-' || c == '\''; });
}

bool dominant_tag(const WordStats& ws, std::string_view tag) {
  const std::int64_t n = ws.pos(tag);
  if (n == 0) return false;
  for (const auto& [t, c] : ws.pos_counts)
    if (t != tag && c >= n) return false;
  return true;
}

std::vector<std::string> phrase_tokens(std::string_view phrase) {
  std::vector<std::string> out;
  for (auto t : split_ws(phrase)) out.emplace_back(t);
  return out;
}

Template parse_template(const YAML::Node& node, const std::map<std::string, std::vector<std::string>>& inv) {
  Template t;
  auto req = [&](const char* key) {
    if (!node[key]) throw Error(ErrorCategory::format, fmt::format("suite definition: missing '{}'", key));
    return node[key].as<std::string>();
  };
  t.id = req("id");
  auto fail = [&](std::string_view msg) {
    throw Error(ErrorCategory::format, fmt::format("suite '{}': {}", t.id, msg));
  };
  t.family = parse_family(req("family"));
  t.rule = parse_rule(req("rule"));
  t.frame_text = req("frame");
  if (node["target_tag"]) t.target_tag = node["target_tag"].as<std::string>();
  if (node["pairs"])
    for (const auto& p : node["pairs"]) {
      if (!p.IsSequence() || p.size() != 2) fail("each pair needs two forms");
      t.pairs.emplace_back(p[0].as<std::string>(), p[1].as<std::string>());
    }
  if (node["filters"])
    for (const auto& f : node["filters"]) t.filters.push_back(parse_filter(f.as<std::string>()));

  int targets = 0, agrees = 0, regions = 0, optionals = 0;
  std::optional<std::size_t> region_open, optional_open;
  std::size_t region_len = 0, optional_len = 0;
  for (auto tok : split_ws(t.frame_text)) {
    Slot s{Slot::Kind::literal, std::string(tok)};
    if (tok == "[") {
      if (region_open || regions) fail("frame needs exactly one [ ... ] region");
      if (optional_open) fail("region and optional span overlap");
      s.kind = Slot::Kind::region_begin;
      region_open = t.frame.size();
    } else if (tok == "]") {
      if (!region_open) fail("unbalanced ']'");
      s.kind = Slot::Kind::region_end;
      region_open.reset();
      ++regions;
    } else if (tok == "(") {
      if (optional_open || optionals) fail("frame allows one ( ... ) span");
      if (region_open) fail("region and optional span overlap");
      s.kind = Slot::Kind::optional_begin;
      optional_open = t.frame.size();
    } else if (tok == ")") {
      if (!optional_open) fail("unbalanced ')'");
      s.kind = Slot::Kind::optional_end;
      optional_open.reset();
      ++optionals;
    } else {
      if (tok.size() > 2 && tok.front() == '<' && tok.back() == '>') {
        s.text = std::string(tok.substr(1, tok.size() - 2));
        if (s.text == "target") {
          s.kind = Slot::Kind::target;
          ++targets;
        } else if (s.text == "agree") {
          s.kind = Slot::Kind::agree;
          ++agrees;
        } else {
          s.kind = Slot::Kind::filler;
          auto it = inv.find(s.text);
          if (it == inv.end()) fail(fmt::format("unknown inventory '{}'", s.text));
        }
      }
      if (region_open) ++region_len;
      if (optional_open) ++optional_len;
    }
    t.frame.push_back(std::move(s));
  }
  if (region_open || optional_open) fail("unclosed span");
  if (targets != 1) fail("frame needs exactly one <target>");
  if (regions != 1 || region_len == 0) fail("frame needs one nonempty [ ... ] region");
  if (is_swap(t.rule)) {
    if (t.family != SuiteFamily::number) fail("swap rules belong to the number family");
    if (agrees != 1 || t.pairs.empty()) fail("swap rules need one <agree> slot and pairs");
    if (optionals) fail("swap rules take no ( ... ) span");
  } else {
    if (t.family != SuiteFamily::argstruct) fail("deletion rules belong to the argstruct family");
    if (agrees) fail("deletion rules take no <agree> slot");
    if (optionals != 1 || optional_len == 0) fail("deletion rules need one nonempty ( ... ) span");
    if (t.target_tag.empty()) fail("argstruct suites need target_tag");
  }
  return t;
}

std::optional<std::string> check_pair(const TestSuite& suite, const TestItem& item) {
  const Sentence& g = item.grammatical;
  const Sentence& u = item.ungrammatical;
  auto region_tokens = [](const Sentence& s) {
    return std::vector<std::string>(s.tokens.begin() + static_cast<std::ptrdiff_t>(s.region_start),
                                    s.tokens.begin() + static_cast<std::ptrdiff_t>(s.region_end));
  };
  if (is_swap(suite.rule)) {
    if (g.tokens.size() != u.tokens.size()) return "conditions differ in length under a swap rule";
    std::vector<std::size_t> diff;
    for (std::size_t i = 0; i < g.tokens.size(); ++i)
      if (g.tokens[i] != u.tokens[i]) diff.push_back(i);
    if (diff.size() != 1) return fmt::format("conditions differ at {} positions, expected 1", diff.size());
    if (g.region_start != u.region_start || g.region_end != u.region_end)
      return "region spans differ between conditions";
    const std::size_t i = diff.front();
    const bool inside = i >= g.region_start && i < g.region_end;
    if (suite.rule == ConditionRule::agreement_swap && !inside)
      return "swapped verb lies outside the region";
    if (suite.rule == ConditionRule::auxiliary_swap && i >= g.region_start)
      return "swapped auxiliary does not precede the region";
    return std::nullopt;
  }
  const bool g_longer = g.tokens.size() > u.tokens.size();
  const Sentence& L = g_longer ? g : u;
  const Sentence& S = g_longer ? u : g;
  if (L.tokens.size() == S.tokens.size()) return "conditions have equal length under a deletion rule";
  const bool transitive = item.category == Category::transitive;
  if (g_longer != transitive) return "deleted span is in the wrong condition for the category";
  std::size_t p = 0;
  while (p < S.tokens.size() && L.tokens[p] == S.tokens[p]) ++p;
  std::size_t s = 0;
  while (s < S.tokens.size() - p &&
         L.tokens[L.tokens.size() - 1 - s] == S.tokens[S.tokens.size() - 1 - s])
    ++s;
  if (p + s != S.tokens.size()) return "conditions differ by more than one contiguous span";
  if (region_tokens(L) != region_tokens(S) ||
      L.tokens.size() - L.region_start != S.tokens.size() - S.region_start)
    return "region differs between conditions";
  return std::nullopt;
}

}  // namespace

std::string_view to_string(SuiteFamily f) noexcept {
  return f == SuiteFamily::number ? "number" : "argstruct";
}

std::string_view to_string(ConditionRule r) noexcept {
  switch (r) {
    case ConditionRule::agreement_swap:
      return "agreement_swap";
    case ConditionRule::auxiliary_swap:
      return "auxiliary_swap";
    case ConditionRule::object_deletion:
      return "object_deletion";
    case ConditionRule::auxiliary_deletion:
      return "auxiliary_deletion";
  }
  return "?";
}

std::string_view to_string(TargetFilter f) noexcept {
  switch (f) {
    case TargetFilter::polar_overlap:
      return "polar_overlap";
    case TargetFilter::same_participle:
      return "same_participle";
    case TargetFilter::active_only:
      return "active_only";
  }
  return "?";
}

std::string_view to_string(Category c) noexcept {
  switch (c) {
    case Category::singular:
      return "singular";
    case Category::plural:
      return "plural";
    case Category::transitive:
      return "transitive";
    case Category::intransitive:
      return "intransitive";
  }
  return "?";
}

SuiteFamily parse_family(std::string_view s) {
  return parse_enum(s, std::array{SuiteFamily::number, SuiteFamily::argstruct}, "suite family");
}
ConditionRule parse_rule(std::string_view s) {
  return parse_enum(s,
                    std::array{ConditionRule::agreement_swap, ConditionRule::auxiliary_swap,
                               ConditionRule::object_deletion, ConditionRule::auxiliary_deletion},
                    "condition rule");
}
TargetFilter parse_filter(std::string_view s) {
  return parse_enum(
      s, std::array{TargetFilter::polar_overlap, TargetFilter::same_participle, TargetFilter::active_only},
      "target filter");
}
Category parse_category(std::string_view s) {
  return parse_enum(
      s, std::array{Category::singular, Category::plural, Category::transitive, Category::intransitive},
      "category");
}

std::vector<Category> Template::categories() const {
  if (family == SuiteFamily::number) return {Category::singular, Category::plural};
  return {Category::transitive, Category::intransitive};
}

std::vector<std::string> Template::filler_slots() const {
  std::vector<std::string> out;
  for (const auto& s : frame)
    if (s.kind == Slot::Kind::filler) out.push_back(s.text);
  return out;
}

const Template& SuiteDefinition::find(std::string_view id) const {
  for (const auto& t : suites)
    if (t.id == id) return t;
  throw Error(ErrorCategory::usage, fmt::format("unknown suite '{}'", id));
}

std::set<std::string> SuiteDefinition::fixed_tokens(const Template& t) const {
  std::set<std::string> out;
  for (const auto& s : t.frame) {
    if (s.kind == Slot::Kind::literal) out.insert(s.text);
    if (s.kind == Slot::Kind::filler)
      for (const auto& phrase : inventories.at(s.text))
        for (auto& tok : phrase_tokens(phrase)) out.insert(std::move(tok));
  }
  for (const auto& [sg, pl] : t.pairs) {
    out.insert(sg);
    out.insert(pl);
  }
  return out;
}

SuiteDefinition parse_suite_definition(std::string_view yaml_text) {
  SuiteDefinition def;
  try {
    const YAML::Node root = YAML::Load(std::string(yaml_text));
    if (root["inventories"])
      for (const auto& kv : root["inventories"]) {
        const auto name = kv.first.as<std::string>();
        auto& list = def.inventories[name];
        for (const auto& p : kv.second) {
          auto phrase = p.as<std::string>();
          if (split_ws(phrase).empty())
            throw Error(ErrorCategory::format, fmt::format("inventory '{}' has an empty phrase", name));
          list.push_back(std::move(phrase));
        }
        if (list.empty()) throw Error(ErrorCategory::format, fmt::format("inventory '{}' is empty", name));
      }
    if (!root["suites"] || !root["suites"].IsSequence())
      throw Error(ErrorCategory::format, "suite definition: missing 'suites' list");
    std::set<std::string> ids;
    for (const auto& node : root["suites"]) {
      Template t = parse_template(node, def.inventories);
      if (!ids.insert(t.id).second)
        throw Error(ErrorCategory::format, fmt::format("duplicate suite id '{}'", t.id));
      def.suites.push_back(std::move(t));
    }
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCategory::format, fmt::format("suite definition: {}", e.what()));
  }
  return def;
}

SuiteDefinition read_suite_definition(const std::string& path) {
  return parse_suite_definition(read_file(path));
}

std::string TestItem::sentence_id(bool grammatical_condition) const {
  return item_id + (grammatical_condition ? ".grammatical" : ".ungrammatical");
}

// ---------------------------------------------------------------------------

std::vector<std::string> candidate_pool(const SuiteDefinition& def, const Template& t,
                                        const GenerationContext& ctx, Category category, int bucket) {
  if (!ctx.lex) throw Error(ErrorCategory::usage, "candidate_pool: no lexicon");
  const auto b = bucket_by_id(bucket);
  if (!b) throw Error(ErrorCategory::usage, fmt::format("unknown exposure bucket {}", bucket));
  const LexiconStats& lex = *ctx.lex;
  const auto excluded = def.fixed_tokens(t);
  std::set<std::string> active_only;
  if (std::find(t.filters.begin(), t.filters.end(), TargetFilter::active_only) != t.filters.end())
    for (auto& w : active_only_verbs(lex, ctx.distinct_participle)) active_only.insert(std::move(w));

  std::vector<std::string> pool;
  for (const auto& [w, ws] : lex.words()) {
    if (!b->contains(ws.total_count) || excluded.count(w) || !is_plain_word(w)) continue;
    if (t.family == SuiteFamily::number) {
      if (!dominant_tag(ws, category == Category::singular ? "NN" : "NNS")) continue;
    } else {
      auto it = ctx.transitivity.find(w);
      if (it == ctx.transitivity.end()) continue;
      const auto want = category == Category::transitive ? TransitivityClass::transitive
                                                          : TransitivityClass::intransitive;
      if (it->second.cls != want || ws.pos(t.target_tag) == 0) continue;
    }
    bool keep = true;
    for (TargetFilter f : t.filters) {
      switch (f) {
        case TargetFilter::polar_overlap:
          keep = keep && ws.inverted == 0;
          break;
        case TargetFilter::same_participle:
          keep = keep && !ctx.distinct_participle.count(w);
          break;
        case TargetFilter::active_only:
          keep = keep && active_only.count(w);
          break;
      }
    }
    if (keep) pool.push_back(w);
  }
  return pool;
}

std::vector<std::string> sample_targets(const std::vector<std::string>& pool, std::size_t n,
                                        std::uint64_t seed, std::string_view label,
                                        std::vector<std::string>* warnings) {
  if (pool.empty()) throw Error(ErrorCategory::generation, fmt::format("{}: no candidate words", label));
  std::vector<std::string> v = pool;
  std::sort(v.begin(), v.end());
  Rng rng(seed);
  const std::size_t k = std::min(n, v.size());
  for (std::size_t i = 0; i < k; ++i) std::swap(v[i], v[i + rng.index(v.size() - i)]);
  v.resize(k);
  std::sort(v.begin(), v.end());
  if (k < n && warnings)
    warnings->push_back(fmt::format("{}: {} of {} words available", label, k, n));
  return v;
}

FrameChoice choose_frame(const SuiteDefinition& def, const Template& t, std::string_view target,
                         int frame, std::uint64_t seed) {
  FrameChoice c;
  if (!t.pairs.empty()) c.pair = static_cast<std::size_t>(frame) % t.pairs.size();
  Rng rng(seed, fmt::format("{}\x1f{}\x1f{}", t.id, target, frame));
  for (const auto& name : t.filler_slots()) {
    const auto& list = def.inventories.at(name);
    c.fillers.push_back(list[rng.index(list.size())]);
  }
  return c;
}

Sentence instantiate(const Template& t, std::string_view target, Category category,
                     const FrameChoice& choice, bool grammatical, const LexiconStats* lex,
                     std::int64_t min_count) {
  Sentence s;
  const bool include_optional = (category == Category::transitive) == grammatical;
  bool in_optional = false;
  std::size_t filler = 0;
  std::optional<std::size_t> target_at;
  for (const auto& slot : t.frame) {
    if (in_optional && !include_optional && slot.kind != Slot::Kind::optional_end) {
      if (slot.kind == Slot::Kind::filler) ++filler;
      continue;
    }
    switch (slot.kind) {
      case Slot::Kind::literal:
        s.tokens.push_back(slot.text);
        break;
      case Slot::Kind::target:
        target_at = s.tokens.size();
        s.tokens.emplace_back(target);
        break;
      case Slot::Kind::agree: {
        const auto& [sg, pl] = t.pairs.at(choice.pair);
        const bool singular = category == Category::singular;
        s.tokens.push_back(singular == grammatical ? sg : pl);
        break;
      }
      case Slot::Kind::filler:
        for (auto& tok : phrase_tokens(choice.fillers.at(filler++))) s.tokens.push_back(std::move(tok));
        break;
      case Slot::Kind::region_begin:
        s.region_start = s.tokens.size();
        break;
      case Slot::Kind::region_end:
        s.region_end = s.tokens.size();
        break;
      case Slot::Kind::optional_begin:
        in_optional = true;
        break;
      case Slot::Kind::optional_end:
        in_optional = false;
        break;
    }
  }
  if (lex) {
    std::vector<std::string> low;
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      if (target_at && i == *target_at) continue;
      const auto n = lex->total_count(s.tokens[i]);
      if (n < min_count) low.push_back(fmt::format("{} ({})", s.tokens[i], n));
    }
    if (!low.empty())
      throw Error(ErrorCategory::generation,
                  fmt::format("suite '{}': tokens below frequency {}: {}", t.id, min_count, join(low, ", ")));
  }
  return s;
}

TestSuite generate_suite(const SuiteDefinition& def, const Template& t, const GenerationContext& ctx,
                         const GenerationParams& params, std::uint64_t seed,
                         std::vector<std::string>* warnings) {
  if (!ctx.lex) throw Error(ErrorCategory::usage, "generate_suite: no lexicon");
  const LexiconStats& lex = *ctx.lex;
  {
    std::vector<std::string> low;
    for (const auto& tok : def.fixed_tokens(t))
      if (lex.total_count(tok) < params.filler_min_count)
        low.push_back(fmt::format("{} ({})", tok, lex.total_count(tok)));
    if (!low.empty())
      throw Error(ErrorCategory::generation, fmt::format("suite '{}': tokens below frequency {}: {}", t.id,
                                                         params.filler_min_count, join(low, ", ")));
  }
  TestSuite suite;
  suite.suite_id = t.id;
  suite.family = t.family;
  suite.rule = t.rule;
  suite.filters = t.filters;
  auto& prov = suite.provenance;
  prov.corpus_hash = ctx.corpus_hash;
  prov.seed = seed;
  prov.words_per_category = params.words_per_category;
  prov.frames_per_word = params.frames_per_word;
  prov.buckets = params.buckets;
  prov.filler_min_count = params.filler_min_count;

  for (int bucket : params.buckets) {
    for (Category cat : t.categories()) {
      const auto label = fmt::format("{} bucket {} {}", t.id, bucket, to_string(cat));
      const auto pool = candidate_pool(def, t, ctx, cat, bucket);
      std::vector<std::string> words;
      if (pool.empty()) {
        prov.shortfalls.push_back(fmt::format("{}: 0 of {} words available", label, params.words_per_category));
        continue;
      }
      words = sample_targets(pool, params.words_per_category,
                             Rng::derive_seed(seed, fmt::format("{}\x1f{}\x1f{}", t.id, bucket, to_string(cat))),
                             label, &prov.shortfalls);
      for (const auto& w : words) {
        for (std::size_t f = 0; f < params.frames_per_word; ++f) {
          const int frame = static_cast<int>(f);
          const auto choice = choose_frame(def, t, w, frame, seed);
          TestItem item;
          item.item_id = fmt::format("{}-{}-{}-{}-{:02}", t.id, bucket, to_string(cat), w, frame);
          item.suite_id = t.id;
          item.target = w;
          item.category = cat;
          item.bucket = bucket;
          item.exposure = lex.total_count(w);
          item.frame = frame;
          item.grammatical = instantiate(t, w, cat, choice, true, &lex, params.filler_min_count);
          item.ungrammatical = instantiate(t, w, cat, choice, false, &lex, params.filler_min_count);
          suite.items.push_back(std::move(item));
        }
      }
    }
  }
  if (warnings) warnings->insert(warnings->end(), prov.shortfalls.begin(), prov.shortfalls.end());
  if (suite.items.empty())
    throw Error(ErrorCategory::generation, fmt::format("suite '{}': no candidate words in any bucket", t.id));
  const auto report = validate_suite(suite, lex, params.filler_min_count);
  if (!report.ok())
    throw Error(ErrorCategory::generation,
                fmt::format("suite '{}': item {} invalid: {}", t.id, report.violations.front().item_id,
                            report.violations.front().message));
  return suite;
}

// ---------------------------------------------------------------------------

ValidationReport validate_suite(const TestSuite& suite, const LexiconStats& lex,
                                std::int64_t filler_min_count) {
  ValidationReport report;
  std::set<std::string> ids;
  std::map<int, std::map<Category, std::size_t>> balance;
  const bool number = suite.family == SuiteFamily::number;
  auto has = [&](TargetFilter f) {
    return std::find(suite.filters.begin(), suite.filters.end(), f) != suite.filters.end();
  };

  auto check = [&](const TestItem& item) -> std::optional<std::string> {
    if (!ids.insert(item.item_id).second) return "duplicate item id";
    if (item.suite_id != suite.suite_id) return fmt::format("suite id '{}' does not match", item.suite_id);
    const bool number_cat = item.category == Category::singular || item.category == Category::plural;
    if (number_cat != number) return "category does not match the suite family";
    for (const Sentence* s : {&item.grammatical, &item.ungrammatical}) {
      const char* which = s == &item.grammatical ? "grammatical" : "ungrammatical";
      if (s->region_start >= s->region_end || s->region_end > s->tokens.size())
        return fmt::format("{} region [{}, {}) invalid for {} tokens", which, s->region_start,
                           s->region_end, s->tokens.size());
      if (std::count(s->tokens.begin(), s->tokens.end(), item.target) != 1)
        return fmt::format("target '{}' does not occur exactly once in the {} sentence", item.target, which);
      for (const auto& tok : s->tokens) {
        if (tok == item.target) continue;
        const auto n = lex.total_count(tok);
        if (n < filler_min_count)
          return fmt::format("token '{}' occurs {} times (< {})", tok, n, filler_min_count);
      }
    }
    const auto b = bucket_by_id(item.bucket);
    if (!b) return fmt::format("unknown bucket {}", item.bucket);
    const auto count = lex.total_count(item.target);
    if (!b->contains(count))
      return fmt::format("target '{}' count {} outside bucket {}", item.target, count, item.bucket);
    if (auto msg = check_pair(suite, item)) return msg;
    const WordStats& ws = lex.get(item.target);
    if (has(TargetFilter::polar_overlap) && ws.inverted > 0)
      return fmt::format("target '{}' occurs in an inverted frame", item.target);
    if (has(TargetFilter::active_only) && (ws.vbn > 0 || ws.pos("VBD") == 0))
      return fmt::format("target '{}' is not an active-only verb", item.target);
    return std::nullopt;
  };

  std::map<int, std::map<Category, std::set<std::string>>> words;
  for (const auto& item : suite.items) {
    if (auto msg = check(item)) report.violations.push_back({item.item_id, *msg});
    ++balance[item.bucket][item.category];
    words[item.bucket][item.category].insert(item.target);
  }
  for (const auto& [bucket, cats] : balance) {
    std::set<std::size_t> sizes;
    for (const auto& [c, n] : cats) sizes.insert(n);
    if (sizes.size() > 1 || cats.size() == 1) {
      std::vector<std::string> parts;
      for (const auto& [c, n] : cats) parts.push_back(fmt::format("{}={}", to_string(c), n));
      report.warnings.push_back(fmt::format("bucket {}: unbalanced categories ({})", bucket, join(parts, ", ")));
    }
  }
  return report;
}

// ---------------------------------------------------------------------------

std::string write_suite_jsonl(const TestSuite& suite) {
  using nlohmann::json;
  json filters = json::array();
  for (auto f : suite.filters) filters.push_back(std::string(to_string(f)));
  const auto& p = suite.provenance;
  json header = {
      {"format", "synprobe-suite"},
      {"version", 1},
      {"suite_id", suite.suite_id},
      {"family", std::string(to_string(suite.family))},
      {"rule", std::string(to_string(suite.rule))},
      {"filters", filters},
      {"provenance",
       {{"corpus_hash", p.corpus_hash},
        {"seed", p.seed},
        {"words_per_category", p.words_per_category},
        {"frames_per_word", p.frames_per_word},
        {"buckets", p.buckets},
        {"filler_min_count", p.filler_min_count},
        {"shortfalls", p.shortfalls}}},
  };
  std::string out = header.dump() + '\n';
  for (const auto& item : suite.items) {
    for (bool g : {true, false}) {
      const Sentence& s = g ? item.grammatical : item.ungrammatical;
      json rec = {
          {"item_id", item.item_id},
          {"suite_id", item.suite_id},
          {"target", item.target},
          {"category", std::string(to_string(item.category))},
          {"bucket", item.bucket},
          {"exposure", item.exposure},
          {"frame", item.frame},
          {"condition", g ? "grammatical" : "ungrammatical"},
          {"tokens", join(s.tokens, " ")},
          {"region_start", s.region_start},
          {"region_end", s.region_end},
      };
      out += rec.dump() + '\n';
    }
  }
  return out;
}

TestSuite read_suite_jsonl(std::string_view text) {
  using nlohmann::json;
  const auto lines = split_lines(text);
  TestSuite suite;
  std::map<std::string, std::size_t> index;
  std::map<std::string, int> seen;  // bit 1 grammatical, bit 2 ungrammatical
  bool have_header = false;
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    if (trim(lines[ln]).empty()) continue;
    const auto where = [&](std::string_view msg) {
      return Error(ErrorCategory::format, fmt::format("suite line {}: {}", ln + 1, msg));
    };
    json j;
    try {
      j = json::parse(lines[ln]);
      if (!have_header) {
        if (j.value("format", "") != "synprobe-suite") throw where("missing suite header");
        suite.suite_id = j.at("suite_id").get<std::string>();
        suite.family = parse_family(j.at("family").get<std::string>());
        suite.rule = parse_rule(j.at("rule").get<std::string>());
        for (const auto& f : j.at("filters")) suite.filters.push_back(parse_filter(f.get<std::string>()));
        const auto& p = j.at("provenance");
        auto& prov = suite.provenance;
        prov.corpus_hash = p.at("corpus_hash").get<std::string>();
        prov.seed = p.at("seed").get<std::uint64_t>();
        prov.words_per_category = p.at("words_per_category").get<std::size_t>();
        prov.frames_per_word = p.at("frames_per_word").get<std::size_t>();
        prov.buckets = p.at("buckets").get<std::vector<int>>();
        prov.filler_min_count = p.at("filler_min_count").get<std::int64_t>();
        prov.shortfalls = p.at("shortfalls").get<std::vector<std::string>>();
        have_header = true;
        continue;
      }
      const auto id = j.at("item_id").get<std::string>();
      const auto cond = j.at("condition").get<std::string>();
      if (cond != "grammatical" && cond != "ungrammatical")
        throw where(fmt::format("unknown condition '{}'", cond));
      const int bit = cond == "grammatical" ? 1 : 2;
      if (seen[id] & bit)
        throw Error(ErrorCategory::duplicate_id, fmt::format("suite line {}: duplicate {} record for '{}'",
                                                             ln + 1, cond, id));
      seen[id] |= bit;
      auto [it, inserted] = index.try_emplace(id, suite.items.size());
      if (inserted) {
        TestItem item;
        item.item_id = id;
        item.suite_id = j.at("suite_id").get<std::string>();
        item.target = j.at("target").get<std::string>();
        item.category = parse_category(j.at("category").get<std::string>());
        item.bucket = j.at("bucket").get<int>();
        item.exposure = j.at("exposure").get<std::int64_t>();
        item.frame = j.at("frame").get<int>();
        suite.items.push_back(std::move(item));
      }
      Sentence& s = bit == 1 ? suite.items[it->second].grammatical : suite.items[it->second].ungrammatical;
      s.tokens = phrase_tokens(j.at("tokens").get<std::string>());
      s.region_start = j.at("region_start").get<std::size_t>();
      s.region_end = j.at("region_end").get<std::size_t>();
    } catch (const json::exception& e) {
      throw where(e.what());
    }
  }
  if (!have_header) throw Error(ErrorCategory::format, "suite file has no header record");
  for (const auto& [id, bits] : seen)
    if (bits != 3) throw Error(ErrorCategory::format, fmt::format("item '{}' lacks a condition", id));
  return suite;
}

TestSuite read_suite_file(const std::string& path) { return read_suite_jsonl(read_file(path)); }

}  // namespace synprobe
