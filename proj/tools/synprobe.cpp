#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "synprobe/config.hpp"
#include "synprobe/error.hpp"
#include "synprobe/pipeline.hpp"

using namespace synprobe;

namespace {

int fail(ErrorCategory c, const std::string& msg) {
  std::cerr << "error[" << category_token(c) << "]: " << msg << '\n';
  return exit_code(c);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Targeted syntactic evaluation pipeline"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> jobs;
  std::string out;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "YAML run configuration");
  app.add_option("--seed", seed, "Generation seed");
  app.add_option("--jobs", jobs, "Worker threads")->check(CLI::Range(1, 4096));
  app.add_option("--out", out, "Output directory");
  app.add_option("--set", overrides, "Config override key=value (repeatable)");

  std::vector<std::string> suites;
  std::string surprisal_file;
  auto* ingest = app.add_subcommand("ingest", "Build the lexicon table from the corpus");
  auto* stats = app.add_subcommand("stats", "Lexical filters and corpus statistics");
  auto* gen = app.add_subcommand("gen", "Generate test suites");
  gen->add_option("suites", suites, "Suite ids (default: all)");
  auto* train = app.add_subcommand("train-ngram", "Train the n-gram baseline");
  auto* score = app.add_subcommand("score", "Write per-token surprisals for suites");
  score->add_option("suites", suites, "Suite ids (default: all generated)");
  auto* eval = app.add_subcommand("eval", "Score items and aggregate accuracy");
  eval->add_option("suites", suites, "Suite ids (default: all generated)");
  eval->add_option("--surprisals", surprisal_file, "Surprisal file for a single suite");
  auto* analyze = app.add_subcommand("analyze", "Fit exposure and supervision models");
  auto* report = app.add_subcommand("report", "Table and chart specs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(ErrorCategory::usage, e.what());
  }

  try {
    RunConfig cfg = load_config(config_path, sp_environment());
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw Error(ErrorCategory::usage, "--set expects key=value, got '" + kv + "'");
      set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (seed) cfg.seed = *seed;
    if (jobs) cfg.jobs = *jobs;
    if (!out.empty()) cfg.out = out;
    validate_config(cfg);

    if (*ingest) cmd_ingest(cfg, std::cerr);
    else if (*stats) cmd_stats(cfg, std::cerr);
    else if (*gen) cmd_gen(cfg, suites, std::cerr);
    else if (*train) cmd_train_ngram(cfg, std::cerr);
    else if (*score) cmd_score(cfg, suites, std::cerr);
    else if (*eval) cmd_eval(cfg, suites, surprisal_file, std::cerr);
    else if (*analyze) cmd_analyze(cfg, std::cerr);
    else if (*report) cmd_report(cfg, std::cerr);
  } catch (const Error& e) {
    return fail(e.category(), e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(ErrorCategory::io, e.what());
  } catch (const std::exception& e) {
    return fail(ErrorCategory::io, e.what());
  }
  return 0;
}
