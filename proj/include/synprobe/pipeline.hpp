#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "synprobe/config.hpp"
#include "synprobe/lexicon.hpp"

namespace synprobe {

/// Artifact locations under the output directory.
struct Layout {
  std::string out;

  std::string lexicon() const;
  std::string stats_dir() const;
  std::string suite(const std::string& id) const;
  std::string suites_dir() const;
  std::string model(const std::string& name) const;
  std::string surprisals(const std::string& suite, const std::string& model) const;
  std::string eval(const std::string& suite, const std::string& model) const;
  std::string eval_items(const std::string& suite, const std::string& model) const;
  std::string eval_dir() const;
  std::string fits() const;
  std::string curves() const;
  std::string report_dir() const;
};

// Every command reads its inputs from the config and the layout, writes its
// outputs into the layout, and sends warnings to `log`. A missing upstream
// artifact is Error(usage).
void cmd_ingest(const RunConfig& cfg, std::ostream& log);
void cmd_stats(const RunConfig& cfg, std::ostream& log);
void cmd_gen(const RunConfig& cfg, const std::vector<std::string>& suite_ids, std::ostream& log);
void cmd_train_ngram(const RunConfig& cfg, std::ostream& log);
void cmd_score(const RunConfig& cfg, const std::vector<std::string>& suite_ids, std::ostream& log);
// `surprisal_file` overrides the scored file for a single suite.
void cmd_eval(const RunConfig& cfg, const std::vector<std::string>& suite_ids, const std::string& surprisal_file,
              std::ostream& log);
void cmd_analyze(const RunConfig& cfg, std::ostream& log);
void cmd_report(const RunConfig& cfg, std::ostream& log);

/// Corpus sentences as token lists (same filtering as the lexicon).
std::vector<std::vector<std::string>> corpus_sentences(const RunConfig& cfg);

/// Hex FNV-1a of the lexicon table.
std::string corpus_hash(const LexiconStats& lex);

/// Nouns whose dominant tag is NN or NNS and whose count lies in a bucket.
std::vector<std::string> bucketed_nouns(const LexiconStats& lex);

}  // namespace synprobe
