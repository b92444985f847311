#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "synprobe/beam.hpp"

namespace synprobe {

struct RunConfig {
  std::vector<std::string> corpus;
  std::string dependency_sidecar;
  std::string suite_definition;
  std::string transitivity_lexicon;
  std::string irregular_verbs;
  std::optional<std::uint64_t> seed;
  std::vector<int> buckets{2, 3, 4, 5, 10, 20, 30, 100};
  std::size_t words_per_category = 20;
  std::size_t frames_per_word = 20;
  std::int64_t filler_min_count = 50;
  double transitivity_hi = 0.9;
  double transitivity_lo = 0.1;
  double epsilon_tie = 1e-9;
  double alpha = 0.05;
  double ci_level = 0.95;
  int ngram_order = 5;
  bool unk_singletons = false;
  bool lowercase = false;
  std::string model = "ngram";  // ngram | adapter | subprocess
  std::string model_name;       // defaults per model kind
  std::string adapter_file;
  std::vector<std::string> scorer_command;
  BeamOptions beam;
  bool action_beam_explicit = false;  // otherwise action_beam_k follows 10 * word_beam_k
  std::string reference_model;
  std::string out = "out";
  unsigned jobs = 1;
  std::string ptb;

  std::string effective_model_name() const;
};

/// Every accepted key, in file order of the documentation.
const std::vector<std::string>& config_keys();

/// Sets `key` from its textual form. Lists are comma-separated, except
/// scorer_command which splits on whitespace. Throws Error(usage).
void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value);

/// Reads the YAML file (if `path` is nonempty) with relative paths resolved
/// against its directory, then applies `SP_<KEY>` variables from `env`, then
/// validates ranges.
RunConfig load_config(const std::string& path, const std::map<std::string, std::string>& env = {});

/// Environment variables with the SP_ prefix from the process environment.
std::map<std::string, std::string> sp_environment();

void validate_config(const RunConfig& cfg);

}  // namespace synprobe
