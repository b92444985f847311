#include "synprobe/lexicon.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>

#include <fmt/format.h>

#include "synprobe/error.hpp"
#include "synprobe/text.hpp"

namespace synprobe {

std::int64_t WordStats::pos(std::string_view tag) const {
  auto it = pos_counts.find(std::string(tag));
  return it == pos_counts.end() ? 0 : it->second;
}

WordStats& WordStats::operator+=(const WordStats& other) {
  total_count += other.total_count;
  for (const auto& [tag, n] : other.pos_counts) pos_counts[tag] += n;
  object_present += other.object_present;
  object_absent += other.object_absent;
  inverted += other.inverted;
  vbn += other.vbn;
  return *this;
}

const WordStats& LexiconStats::get(std::string_view word) const {
  static const WordStats empty;
  auto it = words_.find(word);
  return it == words_.end() ? empty : it->second;
}

bool LexiconStats::contains(std::string_view word) const { return words_.find(word) != words_.end(); }

LexiconStats& LexiconStats::operator+=(const LexiconStats& other) {
  for (const auto& [w, s] : other.words_) words_[w] += s;
  return *this;
}

namespace {

bool contains_tag(const std::vector<std::string>& tags, std::string_view t) {
  return std::find(tags.begin(), tags.end(), t) != tags.end();
}

bool is_empty_element(const Tree& t) { return t.is_preterminal() && t.label == "-NONE-"; }

bool has_overt_terminal(const Tree& t, bool skip_empty) {
  if (t.is_preterminal()) return !(skip_empty && is_empty_element(t));
  return std::any_of(t.children.begin(), t.children.end(),
                     [&](const Tree& c) { return has_overt_terminal(c, skip_empty); });
}

struct Walker {
  const LexiconOptions& opt;
  const std::set<std::int64_t>* dep_heads;  // null: use phrase-structure heuristic
  LexiconStats& lex;
  std::int64_t token_index = 0;  // 1-based after increment

  std::string key(const std::string& w) const { return opt.lowercase ? to_lower(w) : w; }

  void visit(const Tree& node, const Tree* parent, std::size_t child_pos) {
    if (node.is_preterminal()) {
      if (opt.skip_empty_elements && is_empty_element(node)) return;
      ++token_index;
      WordStats& ws = lex.at_or_insert(key(node.word));
      ++ws.total_count;
      ++ws.pos_counts[node.label];
      if (node.label == "VBN") ++ws.vbn;
      if (contains_tag(opt.active_verb_tags, node.label)) {
        bool has_object = false;
        if (dep_heads) {
          has_object = dep_heads->count(token_index) > 0;
        } else if (parent && base_label(parent->label) == "VP") {
          for (std::size_t j = child_pos + 1; j < parent->children.size(); ++j) {
            const Tree& sib = parent->children[j];
            if (!sib.is_preterminal() && base_label(sib.label) == "NP" &&
                has_overt_terminal(sib, opt.skip_empty_elements)) {
              has_object = true;
              break;
            }
          }
        }
        ++(has_object ? ws.object_present : ws.object_absent);
      }
      return;
    }
    for (std::size_t i = 0; i < node.children.size(); ++i) visit(node.children[i], &node, i);
  }
};

// Locates the outermost NP whose first overt token is at `target` (0-based).
const Tree* np_starting_at(const Tree& node, std::size_t& offset, std::size_t target,
                           bool skip_empty) {
  if (node.is_preterminal()) {
    if (!(skip_empty && is_empty_element(node))) ++offset;
    return nullptr;
  }
  const std::size_t start = offset;
  if (start == target && base_label(node.label) == "NP" && has_overt_terminal(node, skip_empty))
    return &node;
  for (const auto& c : node.children) {
    if (const Tree* hit = np_starting_at(c, offset, target, skip_empty)) return hit;
    if (offset > target) return nullptr;
  }
  return nullptr;
}

const Tree* np_head_noun(const Tree& np, const LexiconOptions& opt) {
  const Tree* head = nullptr;
  for (const auto& c : np.children)
    if (c.is_preterminal() && contains_tag(opt.noun_tags, c.label)) head = &c;
  if (head) return head;
  for (const auto& c : np.children)
    if (!c.is_preterminal() && base_label(c.label) == "NP") return np_head_noun(c, opt);
  return nullptr;
}

void count_inversion(const Tree& tree, const LexiconOptions& opt, LexiconStats& lex) {
  std::vector<Terminal> terms;
  for (auto& t : tree.terminals())
    if (!(opt.skip_empty_elements && t.tag == "-NONE-")) terms.push_back(std::move(t));
  if (terms.size() < 2) return;
  const Terminal& first = terms.front();
  if (first.tag.rfind("VB", 0) != 0) return;
  const std::string lowered = to_lower(first.word);
  if (!contains_tag(opt.inversion_auxiliaries, lowered)) return;
  std::size_t offset = 0;
  const Tree* np = np_starting_at(tree, offset, 1, opt.skip_empty_elements);
  if (!np) return;
  if (const Tree* noun = np_head_noun(*np, opt)) {
    const std::string k = opt.lowercase ? to_lower(noun->word) : noun->word;
    ++lex.at_or_insert(k).inverted;
  }
}

}  // namespace

DependencyObjects read_dependency_sidecar(const std::string& path) {
  DependencyObjects deps;
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line.front() == '#') continue;
    auto f = split(line, '\t');
    if (f.size() != 4)
      throw Error(ErrorCategory::format,
                  fmt::format("{}:{}: expected 4 tab-separated fields", path, lineno));
    const auto sent = parse_int(f[0], path, lineno);
    const auto head = parse_int(f[2], path, lineno);
    parse_int(f[1], path, lineno);
    deps.sentences.insert(sent);
    if (f[3] == "obj" || f[3] == "dobj") deps.heads_with_object[sent].insert(head);
  }
  return deps;
}

LexiconStats build_lexicon(std::span<const Tree> trees, const LexiconOptions& options,
                           const DependencyObjects* deps, std::int64_t first_sentence_id) {
  LexiconStats lex;
  static const std::set<std::int64_t> kNoHeads;
  for (std::size_t i = 0; i < trees.size(); ++i) {
    const std::int64_t sid = first_sentence_id + static_cast<std::int64_t>(i);
    const std::set<std::int64_t>* heads = nullptr;
    if (deps && deps->sentences.count(sid)) {
      auto it = deps->heads_with_object.find(sid);
      heads = it == deps->heads_with_object.end() ? &kNoHeads : &it->second;
    }
    Walker w{options, heads, lex};
    w.visit(trees[i], nullptr, 0);
    count_inversion(trees[i], options, lex);
  }
  return lex;
}

std::vector<std::string> sentence_tokens(const Tree& tree, const LexiconOptions& options) {
  std::vector<std::string> out;
  for (auto& t : tree.terminals()) {
    if (options.skip_empty_elements && t.tag == "-NONE-") continue;
    out.push_back(options.lowercase ? to_lower(t.word) : std::move(t.word));
  }
  return out;
}

std::string write_lexicon_table(const LexiconStats& lex) {
  std::string out = "#word\ttotal\tpos\tobj_present\tobj_absent\tinverted\tvbn\n";
  for (const auto& [w, s] : lex.words()) {
    std::string pos;
    for (const auto& [tag, n] : s.pos_counts) {
      if (!pos.empty()) pos += ' ';
      pos += fmt::format("{}:{}", tag, n);
    }
    if (pos.empty()) pos = "-";
    out += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t{}\n", w, s.total_count, pos, s.object_present,
                       s.object_absent, s.inverted, s.vbn);
  }
  return out;
}

LexiconStats read_lexicon_table(std::string_view text) {
  LexiconStats lex;
  std::size_t lineno = 0;
  for (std::string_view line : split_lines(text)) {
    ++lineno;
    if (line.empty() || line.front() == '#') continue;
    auto f = split(line, '\t');
    if (f.size() != 7)
      throw Error(ErrorCategory::format,
                  fmt::format("lexicon table line {}: expected 7 fields, got {}", lineno, f.size()));
    WordStats& s = lex.at_or_insert(std::string(f[0]));
    s.total_count = parse_int(f[1], "lexicon table", lineno);
    if (f[2] != "-") {
      for (std::string_view pair : split(f[2], ' ')) {
        const auto colon = pair.rfind(':');
        if (colon == std::string_view::npos || colon == 0)
          throw Error(ErrorCategory::format,
                      fmt::format("lexicon table line {}: bad tag count '{}'", lineno, pair));
        s.pos_counts[std::string(pair.substr(0, colon))] =
            parse_int(pair.substr(colon + 1), "lexicon table", lineno);
      }
    }
    s.object_present = parse_int(f[3], "lexicon table", lineno);
    s.object_absent = parse_int(f[4], "lexicon table", lineno);
    s.inverted = parse_int(f[5], "lexicon table", lineno);
    s.vbn = parse_int(f[6], "lexicon table", lineno);
  }
  return lex;
}

double vbn_fraction(const LexiconStats& lex, std::string_view verb) {
  const WordStats& s = lex.get(verb);
  if (s.total_count <= 0)
    throw Error(ErrorCategory::undefined_input,
                fmt::format("vbn_fraction: '{}' does not occur in the corpus", verb));
  return static_cast<double>(s.vbn) / static_cast<double>(s.total_count);
}

std::string_view to_string(TransitivityClass c) noexcept {
  switch (c) {
    case TransitivityClass::transitive: return "transitive";
    case TransitivityClass::intransitive: return "intransitive";
    case TransitivityClass::excluded: return "excluded";
  }
  return "excluded";
}

std::map<std::string, TransitivityClass> read_transitivity_lexicon(std::string_view text) {
  std::map<std::string, TransitivityClass> out;
  std::size_t lineno = 0;
  for (std::string_view line : split_lines(text)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    auto f = split(line, '\t');
    if (f.size() != 2)
      throw Error(ErrorCategory::format,
                  fmt::format("transitivity lexicon line {}: expected verb<TAB>class", lineno));
    const std::string_view cls = trim(f[1]);
    if (cls == "transitive") {
      out[std::string(f[0])] = TransitivityClass::transitive;
    } else if (cls == "intransitive") {
      out[std::string(f[0])] = TransitivityClass::intransitive;
    } else {
      throw Error(ErrorCategory::format,
                  fmt::format("transitivity lexicon line {}: unknown class '{}'", lineno, cls));
    }
  }
  return out;
}

std::map<std::string, TransitivityDecision> classify_transitivity(
    const LexiconStats& lex, const std::map<std::string, TransitivityClass>& external,
    double hi, double lo) {
  if (!(hi > lo)) throw Error(ErrorCategory::usage, "classify_transitivity: requires hi > lo");
  std::map<std::string, TransitivityDecision> out;
  for (const auto& [verb, marked] : external) {
    TransitivityDecision d;
    if (marked == TransitivityClass::excluded) {
      d.reason = "not-marked";
      out[verb] = d;
      continue;
    }
    const WordStats& s = lex.get(verb);
    if (s.total_count == 0) {
      d.reason = "absent-from-corpus";
    } else if (s.object_present + s.object_absent == 0) {
      d.reason = "no-active-evidence";
    } else {
      d.object_fraction = static_cast<double>(s.object_present) /
                          static_cast<double>(s.object_present + s.object_absent);
      const bool keep = marked == TransitivityClass::transitive ? d.object_fraction >= hi
                                                                : d.object_fraction <= lo;
      d.cls = keep ? marked : TransitivityClass::excluded;
      d.reason = keep ? "kept" : "threshold";
    }
    out[verb] = d;
  }
  return out;
}

PolarFilterResult filter_polar_overlap(std::span<const std::string> nouns,
                                       const LexiconStats& lex) {
  PolarFilterResult r;
  for (const auto& n : nouns) (lex.get(n).inverted > 0 ? r.removed : r.kept).push_back(n);
  return r;
}

std::set<std::string> read_irregular_verbs(std::string_view text) {
  std::set<std::string> out;
  std::size_t lineno = 0;
  for (std::string_view line : split_lines(text)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    auto f = split(line, '\t');
    if (f.size() != 3)
      throw Error(ErrorCategory::format,
                  fmt::format("irregular verb list line {}: expected base<TAB>past<TAB>participle",
                              lineno));
    if (f[1] != f[2]) out.insert(std::string(f[1]));
  }
  return out;
}

std::vector<std::string> active_only_verbs(const LexiconStats& lex,
                                           const std::set<std::string>& distinct_participle) {
  std::vector<std::string> out;
  for (const auto& [w, s] : lex.words())
    if (s.pos("VBD") > 0 && s.vbn == 0 && !distinct_participle.count(w)) out.push_back(w);
  return out;
}

}  // namespace synprobe
