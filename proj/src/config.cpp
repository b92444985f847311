#include "synprobe/config.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <set>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "synprobe/error.hpp"
#include "synprobe/exposure.hpp"
#include "synprobe/text.hpp"
#include "synprobe/tree.hpp"

extern char** environ;

namespace synprobe {

namespace {

const std::set<std::string, std::less<>> kPathKeys{
    "corpus",       "dependency_sidecar", "suite_definition", "transitivity_lexicon",
    "irregular_verbs", "adapter_file",    "out",              "ptb"};

[[noreturn]] void bad(std::string_view key, std::string_view value, std::string_view why) {
  throw Error(ErrorCategory::usage, fmt::format("config {}='{}': {}", key, value, why));
}

std::int64_t to_int(std::string_view key, std::string_view v) {
  try {
    return parse_int(trim(v), key, 0);
  } catch (const Error&) {
    bad(key, v, "expected an integer");
  }
}

double to_double(std::string_view key, std::string_view v) {
  try {
    return parse_double(trim(v), key, 0);
  } catch (const Error&) {
    bad(key, v, "expected a number");
  }
}

bool to_bool(std::string_view key, std::string_view v) {
  const auto s = to_lower(trim(v));
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  bad(key, v, "expected a boolean");
}

std::vector<std::string> to_list(std::string_view v) {
  std::vector<std::string> out;
  for (auto part : split(v, ','))
    if (!trim(part).empty()) out.emplace_back(trim(part));
  return out;
}

std::string resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty() || base.empty() || std::filesystem::path(p).is_absolute()) return p;
  return (base / p).lexically_normal().string();
}

}  // namespace

std::string RunConfig::effective_model_name() const {
  if (!model_name.empty()) return model_name;
  if (model == "ngram") return fmt::format("ngram{}", ngram_order);
  if (model == "subprocess") return "scorer";
  return model;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "corpus",          "dependency_sidecar", "suite_definition", "transitivity_lexicon",
      "irregular_verbs", "seed",               "buckets",          "words_per_category",
      "frames_per_word", "filler_min_count",   "transitivity_hi",  "transitivity_lo",
      "epsilon_tie",     "alpha",              "ci_level",         "ngram_order",
      "unk_singletons",  "lowercase",          "model",            "model_name",
      "adapter_file",    "scorer_command",     "word_beam_k",      "action_beam_k",
      "fast_track_k",    "reference_model",    "out",              "jobs",
      "ptb"};
  return keys;
}

void set_config_value(RunConfig& c, std::string_view key, std::string_view value) {
  const std::string v(trim(value));
  if (key == "corpus") c.corpus = to_list(v);
  else if (key == "dependency_sidecar") c.dependency_sidecar = v;
  else if (key == "suite_definition") c.suite_definition = v;
  else if (key == "transitivity_lexicon") c.transitivity_lexicon = v;
  else if (key == "irregular_verbs") c.irregular_verbs = v;
  else if (key == "seed") {
    const auto s = to_int(key, v);
    if (s < 0) bad(key, v, "must be >= 0");
    c.seed = static_cast<std::uint64_t>(s);
  } else if (key == "buckets") {
    c.buckets.clear();
    for (const auto& b : to_list(v)) c.buckets.push_back(static_cast<int>(to_int(key, b)));
  } else if (key == "words_per_category") c.words_per_category = static_cast<std::size_t>(to_int(key, v));
  else if (key == "frames_per_word") c.frames_per_word = static_cast<std::size_t>(to_int(key, v));
  else if (key == "filler_min_count") c.filler_min_count = to_int(key, v);
  else if (key == "transitivity_hi") c.transitivity_hi = to_double(key, v);
  else if (key == "transitivity_lo") c.transitivity_lo = to_double(key, v);
  else if (key == "epsilon_tie") c.epsilon_tie = to_double(key, v);
  else if (key == "alpha") c.alpha = to_double(key, v);
  else if (key == "ci_level") c.ci_level = to_double(key, v);
  else if (key == "ngram_order") c.ngram_order = static_cast<int>(to_int(key, v));
  else if (key == "unk_singletons") c.unk_singletons = to_bool(key, v);
  else if (key == "lowercase") c.lowercase = to_bool(key, v);
  else if (key == "model") c.model = v;
  else if (key == "model_name") c.model_name = v;
  else if (key == "adapter_file") c.adapter_file = v;
  else if (key == "scorer_command") {
    c.scorer_command.clear();
    for (auto a : split_ws(v)) c.scorer_command.emplace_back(a);
  } else if (key == "word_beam_k") {
    c.beam.word_beam_k = static_cast<std::size_t>(to_int(key, v));
    if (!c.action_beam_explicit) c.beam.action_beam_k = 10 * c.beam.word_beam_k;
  } else if (key == "action_beam_k") {
    c.beam.action_beam_k = static_cast<std::size_t>(to_int(key, v));
    c.action_beam_explicit = true;
  }
  else if (key == "fast_track_k") c.beam.fast_track_k = static_cast<std::size_t>(to_int(key, v));
  else if (key == "reference_model") c.reference_model = v;
  else if (key == "out") c.out = v;
  else if (key == "jobs") c.jobs = static_cast<unsigned>(to_int(key, v));
  else if (key == "ptb") c.ptb = v;
  else throw Error(ErrorCategory::usage, fmt::format("unknown config key '{}'", key));
}

RunConfig load_config(const std::string& path, const std::map<std::string, std::string>& env) {
  RunConfig cfg;
  if (!path.empty()) {
    const std::filesystem::path base = std::filesystem::path(path).parent_path();
    YAML::Node root;
    try {
      root = YAML::Load(read_file(path));
    } catch (const YAML::Exception& e) {
      throw Error(ErrorCategory::usage, fmt::format("config {}: {}", path, e.what()));
    }
    if (root && !root.IsNull()) {
      if (!root.IsMap()) throw Error(ErrorCategory::usage, fmt::format("config {}: expected a mapping", path));
      for (const auto& kv : root) {
        const auto key = kv.first.as<std::string>();
        std::vector<std::string> values;
        if (kv.second.IsSequence())
          for (const auto& x : kv.second) values.push_back(x.as<std::string>());
        else if (!kv.second.IsNull())
          values.push_back(kv.second.as<std::string>());
        if (kPathKeys.count(key))
          for (auto& v : values) v = resolve(base, v);
        set_config_value(cfg, key, join(values, key == "scorer_command" ? " " : ","));
      }
    }
  }
  for (const auto& key : config_keys()) {
    std::string name = "SP_";
    for (char ch : key) name += static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    if (auto it = env.find(name); it != env.end()) set_config_value(cfg, key, it->second);
  }
  validate_config(cfg);
  return cfg;
}

std::map<std::string, std::string> sp_environment() {
  std::map<std::string, std::string> out;
  for (char** e = environ; e && *e; ++e) {
    std::string_view kv(*e);
    if (!kv.starts_with("SP_")) continue;
    const auto eq = kv.find('=');
    if (eq == std::string_view::npos) continue;
    out.emplace(std::string(kv.substr(0, eq)), std::string(kv.substr(eq + 1)));
  }
  return out;
}

void validate_config(const RunConfig& c) {
  auto fail = [](std::string_view msg) { throw Error(ErrorCategory::usage, fmt::format("config: {}", msg)); };
  if (c.buckets.empty()) fail("buckets is empty");
  for (int b : c.buckets)
    if (!bucket_by_id(b)) fail(fmt::format("unknown bucket {}", b));
  if (c.words_per_category < 1 || c.frames_per_word < 1) fail("words_per_category and frames_per_word must be >= 1");
  if (c.filler_min_count < 0) fail("filler_min_count must be >= 0");
  if (!(c.transitivity_lo >= 0.0 && c.transitivity_lo < c.transitivity_hi && c.transitivity_hi <= 1.0))
    fail("need 0 <= transitivity_lo < transitivity_hi <= 1");
  if (!(c.epsilon_tie >= 0.0)) fail("epsilon_tie must be >= 0");
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) fail("alpha must lie in (0, 1)");
  if (!(c.ci_level > 0.0 && c.ci_level < 1.0)) fail("ci_level must lie in (0, 1)");
  if (c.ngram_order < 1) fail("ngram_order must be >= 1");
  if (c.model != "ngram" && c.model != "adapter" && c.model != "subprocess")
    fail(fmt::format("model must be ngram, adapter or subprocess, not '{}'", c.model));
  if (c.beam.word_beam_k < 1 || c.beam.action_beam_k < 1 || c.beam.fast_track_k < 1)
    fail("beam sizes must be >= 1");
  if (c.jobs < 1) fail("jobs must be >= 1");
  if (c.effective_model_name().find_first_of(",/\t\n ") != std::string::npos)
    fail("model_name may not contain commas, slashes or whitespace");
}

}  // namespace synprobe
