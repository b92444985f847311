#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "synprobe/tree.hpp"

namespace synprobe {

struct WordStats {
  std::int64_t total_count = 0;
  std::map<std::string, std::int64_t> pos_counts;
  std::int64_t object_present = 0;
  std::int64_t object_absent = 0;
  std::int64_t inverted = 0;  // subject noun of a sentence-initial inverted auxiliary
  std::int64_t vbn = 0;

  std::int64_t pos(std::string_view tag) const;
  WordStats& operator+=(const WordStats& other);
  friend bool operator==(const WordStats&, const WordStats&) = default;
};

/// Per word-form statistics over a treebank. Keys are sorted bytewise.
class LexiconStats {
 public:
  const WordStats& get(std::string_view word) const;
  bool contains(std::string_view word) const;
  std::int64_t total_count(std::string_view word) const { return get(word).total_count; }

  WordStats& at_or_insert(const std::string& word) { return words_[word]; }
  const std::map<std::string, WordStats, std::less<>>& words() const noexcept { return words_; }
  std::size_t size() const noexcept { return words_.size(); }

  LexiconStats& operator+=(const LexiconStats& other);
  friend bool operator==(const LexiconStats&, const LexiconStats&) = default;

 private:
  std::map<std::string, WordStats, std::less<>> words_;
};

/// Object relations from a dependency sidecar, keyed by sentence index in
/// corpus order; values are 1-based token indices of verbs heading an
/// `obj`/`dobj` dependent. A sentence listed here overrides the
/// phrase-structure heuristic.
struct DependencyObjects {
  std::map<std::int64_t, std::set<std::int64_t>> heads_with_object;
  std::set<std::int64_t> sentences;
};

DependencyObjects read_dependency_sidecar(const std::string& path);

struct LexiconOptions {
  // Sentence-initial auxiliaries that mark an inverted polar frame; matched
  // case-insensitively.
  std::vector<std::string> inversion_auxiliaries{"is", "are", "was", "were", "do", "does",
                                                 "did", "has", "have", "had"};
  // Verbal tags whose uses count as object present/absent evidence.
  std::vector<std::string> active_verb_tags{"VB", "VBD", "VBP", "VBZ"};
  std::vector<std::string> noun_tags{"NN", "NNS", "NNP", "NNPS"};
  bool lowercase = false;
  bool skip_empty_elements = true;  // drop -NONE- terminals
};

/// Pure fold over trees; build(A ++ B) == build(A) + build(B) whenever the
/// sidecar (if any) is indexed consistently via `first_sentence_id`.
LexiconStats build_lexicon(std::span<const Tree> trees, const LexiconOptions& options = {},
                           const DependencyObjects* deps = nullptr,
                           std::int64_t first_sentence_id = 0);

/// Token sequence used for n-gram training and counting (same filtering and
/// case handling as build_lexicon).
std::vector<std::string> sentence_tokens(const Tree& tree, const LexiconOptions& options = {});

// Deterministic tab-separated table:
//   word  total  tag:count tag:count  obj_present  obj_absent  inverted  vbn
std::string write_lexicon_table(const LexiconStats& lex);
LexiconStats read_lexicon_table(std::string_view text);

double vbn_fraction(const LexiconStats& lex, std::string_view verb);

enum class TransitivityClass { transitive, intransitive, excluded };
std::string_view to_string(TransitivityClass c) noexcept;

struct TransitivityDecision {
  TransitivityClass cls = TransitivityClass::excluded;
  std::string reason;      // kept | absent-from-corpus | no-active-evidence | threshold
  double object_fraction = std::numeric_limits<double>::quiet_NaN();
};

/// External two-column lexicon: `verb<TAB>transitive|intransitive`.
std::map<std::string, TransitivityClass> read_transitivity_lexicon(std::string_view text);

/// Keeps an externally transitive verb iff its with-object fraction is
/// >= `hi`, an externally intransitive verb iff the fraction is <= `lo`.
std::map<std::string, TransitivityDecision> classify_transitivity(
    const LexiconStats& lex, const std::map<std::string, TransitivityClass>& external,
    double hi = 0.9, double lo = 0.1);

struct PolarFilterResult {
  std::vector<std::string> kept;
  std::vector<std::string> removed;
};

PolarFilterResult filter_polar_overlap(std::span<const std::string> nouns,
                                       const LexiconStats& lex);

/// Past-tense forms whose past participle differs (gave/given). Input lines
/// are `base<TAB>past<TAB>participle`.
std::set<std::string> read_irregular_verbs(std::string_view text);

/// Verbs attested as VBD but never as VBN, excluding past forms listed as
/// having a distinct participle.
std::vector<std::string> active_only_verbs(const LexiconStats& lex,
                                           const std::set<std::string>& distinct_participle = {});

}  // namespace synprobe
