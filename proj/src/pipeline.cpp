#include "synprobe/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <ostream>
#include <set>

#include <fmt/format.h>

#include "synprobe/analysis.hpp"
#include "synprobe/beam.hpp"
#include "synprobe/error.hpp"
#include "synprobe/exposure.hpp"
#include "synprobe/ngram.hpp"
#include "synprobe/scoring.hpp"
#include "synprobe/stats.hpp"
#include "synprobe/suite.hpp"
#include "synprobe/surprisal.hpp"
#include "synprobe/text.hpp"
#include "synprobe/tree.hpp"

namespace fs = std::filesystem;

namespace synprobe {

namespace {

std::string under(const std::string& out, const std::string& rel) { return (fs::path(out) / rel).string(); }

void require(const std::string& path, std::string_view what, std::string_view producer) {
  if (!fs::exists(path))
    throw Error(ErrorCategory::usage, fmt::format("missing {} '{}' (run `synprobe {}` first)", what, path, producer));
}

void require_input(const std::string& path, std::string_view key) {
  if (path.empty()) throw Error(ErrorCategory::usage, fmt::format("config key '{}' is not set", key));
  if (!fs::exists(path)) throw Error(ErrorCategory::usage, fmt::format("{} '{}' does not exist", key, path));
}

void put(const std::string& path, std::string_view contents) {
  fs::create_directories(fs::path(path).parent_path());
  write_file(path, contents);
}

LexiconOptions lexicon_options(const RunConfig& cfg) {
  LexiconOptions o;
  o.lowercase = cfg.lowercase;
  return o;
}

LexiconStats load_lexicon(const Layout& layout) {
  require(layout.lexicon(), "lexicon table", "ingest");
  return read_lexicon_table(read_file(layout.lexicon()));
}

std::map<std::string, TransitivityClass> load_transitivity(const RunConfig& cfg) {
  require_input(cfg.transitivity_lexicon, "transitivity_lexicon");
  return read_transitivity_lexicon(read_file(cfg.transitivity_lexicon));
}

std::set<std::string> load_irregular(const RunConfig& cfg) {
  if (cfg.irregular_verbs.empty()) return {};
  require_input(cfg.irregular_verbs, "irregular_verbs");
  return read_irregular_verbs(read_file(cfg.irregular_verbs));
}

// Suite ids from the arguments, or every generated suite file.
std::vector<std::string> generated_suites(const Layout& layout, const std::vector<std::string>& ids) {
  if (!ids.empty()) {
    for (const auto& id : ids) require(layout.suite(id), "suite file", "gen");
    return ids;
  }
  std::vector<std::string> out;
  if (fs::is_directory(layout.suites_dir()))
    for (const auto& e : fs::directory_iterator(layout.suites_dir()))
      if (e.path().extension() == ".jsonl") out.push_back(e.path().stem().string());
  if (out.empty()) throw Error(ErrorCategory::usage, fmt::format("no suites in '{}' (run `synprobe gen` first)", layout.suites_dir()));
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> files_with_suffix(const std::string& dir, std::string_view suffix) {
  std::vector<std::string> out;
  if (fs::is_directory(dir))
    for (const auto& e : fs::directory_iterator(dir)) {
      const auto name = e.path().filename().string();
      if (name.ends_with(suffix)) out.push_back(e.path().string());
    }
  std::sort(out.begin(), out.end());
  return out;
}

struct SuiteSentences {
  std::vector<std::vector<std::string>> tokens;
  std::vector<std::string> ids;
};

SuiteSentences sentences_of(const TestSuite& suite) {
  SuiteSentences s;
  for (const auto& item : suite.items)
    for (bool g : {true, false}) {
      s.tokens.push_back((g ? item.grammatical : item.ungrammatical).tokens);
      s.ids.push_back(item.sentence_id(g));
    }
  return s;
}

}  // namespace

std::string Layout::lexicon() const { return under(out, "lexicon.tsv"); }
std::string Layout::stats_dir() const { return under(out, "stats"); }
std::string Layout::suites_dir() const { return under(out, "suites"); }
std::string Layout::suite(const std::string& id) const { return under(out, "suites/" + id + ".jsonl"); }
std::string Layout::model(const std::string& name) const { return under(out, "models/" + name + ".txt"); }
std::string Layout::surprisals(const std::string& suite, const std::string& model) const {
  return under(out, fmt::format("surprisals/{}.{}.tsv", suite, model));
}
std::string Layout::eval_dir() const { return under(out, "eval"); }
std::string Layout::eval(const std::string& suite, const std::string& model) const {
  return under(out, fmt::format("eval/{}.{}.csv", suite, model));
}
std::string Layout::eval_items(const std::string& suite, const std::string& model) const {
  return under(out, fmt::format("eval/{}.{}.items.csv", suite, model));
}
std::string Layout::fits() const { return under(out, "analysis/fits.csv"); }
std::string Layout::curves() const { return under(out, "analysis/curves.csv"); }
std::string Layout::report_dir() const { return under(out, "report"); }

std::string corpus_hash(const LexiconStats& lex) { return fmt::format("{:016x}", fnv1a64(write_lexicon_table(lex))); }

std::vector<std::string> bucketed_nouns(const LexiconStats& lex) {
  std::vector<std::string> out;
  for (const auto& [word, ws] : lex.words()) {
    if (!exposure_bucket(ws.total_count)) continue;
    const auto nn = ws.pos("NN"), nns = ws.pos("NNS");
    std::int64_t best_other = 0;
    for (const auto& [tag, c] : ws.pos_counts)
      if (tag != "NN" && tag != "NNS") best_other = std::max(best_other, c);
    if (std::max(nn, nns) > best_other && nn != nns) out.push_back(word);
  }
  return out;
}

std::vector<std::vector<std::string>> corpus_sentences(const RunConfig& cfg) {
  if (cfg.corpus.empty()) throw Error(ErrorCategory::usage, "config key 'corpus' is not set");
  for (const auto& p : cfg.corpus) require_input(p, "corpus");
  const auto trees = read_treebank_files(cfg.corpus);
  const auto opts = lexicon_options(cfg);
  std::vector<std::vector<std::string>> out;
  out.reserve(trees.size());
  for (const auto& t : trees) out.push_back(sentence_tokens(t, opts));
  return out;
}

void cmd_ingest(const RunConfig& cfg, std::ostream& log) {
  const Layout layout{cfg.out};
  if (cfg.corpus.empty()) throw Error(ErrorCategory::usage, "config key 'corpus' is not set");
  for (const auto& p : cfg.corpus) require_input(p, "corpus");
  const auto trees = read_treebank_files(cfg.corpus);
  DependencyObjects deps;
  const bool have_deps = !cfg.dependency_sidecar.empty();
  if (have_deps) {
    require_input(cfg.dependency_sidecar, "dependency_sidecar");
    deps = read_dependency_sidecar(cfg.dependency_sidecar);
  }
  const auto lex = build_lexicon(trees, lexicon_options(cfg), have_deps ? &deps : nullptr);
  put(layout.lexicon(), write_lexicon_table(lex));
  log << fmt::format("ingest: {} trees, {} word types\n", trees.size(), lex.size());
}

void cmd_stats(const RunConfig& cfg, std::ostream& log) {
  const Layout layout{cfg.out};
  const auto lex = load_lexicon(layout);
  std::int64_t tokens = 0;
  for (const auto& [w, ws] : lex.words()) tokens += ws.total_count;

  std::vector<std::pair<std::string, std::string>> summary{
      {"word_types", std::to_string(lex.size())}, {"tokens", std::to_string(tokens)}};

  const auto nouns = bucketed_nouns(lex);
  const auto polar = filter_polar_overlap(nouns, lex);
  summary.emplace_back("bucketed_nouns", std::to_string(nouns.size()));
  summary.emplace_back("polar_overlap_removed", std::to_string(polar.removed.size()));
  put(under(layout.stats_dir(), "polar_overlap.txt"), polar.removed.empty() ? "" : join(polar.removed, "\n") + "\n");

  const auto active = active_only_verbs(lex, load_irregular(cfg));
  summary.emplace_back("active_only_verbs", std::to_string(active.size()));
  put(under(layout.stats_dir(), "active_only.txt"), active.empty() ? "" : join(active, "\n") + "\n");

  if (!cfg.transitivity_lexicon.empty()) {
    const auto external = load_transitivity(cfg);
    const auto decisions = classify_transitivity(lex, external, cfg.transitivity_hi, cfg.transitivity_lo);
    std::string table = "verb\texternal\tclass\treason\tobject_fraction\ttotal\tvbn_fraction\n";
    std::map<TransitivityClass, int> kept;
    std::vector<double> freq, vbn;
    for (const auto& [verb, d] : decisions) {
      ++kept[d.cls];
      const auto total = lex.total_count(verb);
      const double frac = total > 0 ? vbn_fraction(lex, verb) : std::nan("");
      table += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t{}\n", verb, to_string(external.at(verb)), to_string(d.cls),
                           d.reason, std::isnan(d.object_fraction) ? "" : format_double(d.object_fraction), total,
                           std::isnan(frac) ? "" : format_double(frac));
      if (total > 0) {
        freq.push_back(std::log10(static_cast<double>(total)));
        vbn.push_back(frac);
      }
    }
    put(under(layout.stats_dir(), "transitivity.tsv"), table);
    summary.emplace_back("transitive_kept", std::to_string(kept[TransitivityClass::transitive]));
    summary.emplace_back("intransitive_kept", std::to_string(kept[TransitivityClass::intransitive]));
    summary.emplace_back("excluded", std::to_string(kept[TransitivityClass::excluded]));
    try {
      const auto c = pearson_test(freq, vbn);
      summary.emplace_back("freq_vbn_r", format_double(c.r));
      summary.emplace_back("freq_vbn_p", format_double(c.p));
      summary.emplace_back("freq_vbn_n", std::to_string(c.n));
    } catch (const Error& e) {
      log << fmt::format("warning: frequency/VBN correlation undefined: {}\n", e.what());
    }
  }

  std::string text;
  for (const auto& [k, v] : summary) text += k + '\t' + v + '\n';
  put(under(layout.stats_dir(), "summary.txt"), text);
}

void cmd_gen(const RunConfig& cfg, const std::vector<std::string>& suite_ids, std::ostream& log) {
  const Layout layout{cfg.out};
  if (!cfg.seed) throw Error(ErrorCategory::usage, "gen requires a seed (--seed or config key 'seed')");
  const auto lex = load_lexicon(layout);
  require_input(cfg.suite_definition, "suite_definition");
  const auto def = read_suite_definition(cfg.suite_definition);

  std::vector<const Template*> chosen;
  if (suite_ids.empty())
    for (const auto& t : def.suites) chosen.push_back(&t);
  else
    for (const auto& id : suite_ids) chosen.push_back(&def.find(id));

  GenerationContext ctx;
  ctx.lex = &lex;
  ctx.corpus_hash = corpus_hash(lex);
  const bool argstruct = std::any_of(chosen.begin(), chosen.end(),
                                     [](const Template* t) { return t->family == SuiteFamily::argstruct; });
  if (argstruct) {
    ctx.transitivity = classify_transitivity(lex, load_transitivity(cfg), cfg.transitivity_hi, cfg.transitivity_lo);
    ctx.distinct_participle = load_irregular(cfg);
  }
  GenerationParams params;
  params.words_per_category = cfg.words_per_category;
  params.frames_per_word = cfg.frames_per_word;
  params.buckets = cfg.buckets;
  params.filler_min_count = cfg.filler_min_count;

  for (const Template* t : chosen) {
    std::vector<std::string> warnings;
    const auto suite = generate_suite(def, *t, ctx, params, *cfg.seed, &warnings);
    for (const auto& w : warnings) log << "warning: " << t->id << ": " << w << '\n';
    put(layout.suite(t->id), write_suite_jsonl(suite));
    log << fmt::format("gen: {} items, {} sentences -> {}\n", suite.items.size(), suite.sentence_count(),
                       layout.suite(t->id));
  }
}

void cmd_train_ngram(const RunConfig& cfg, std::ostream& log) {
  const Layout layout{cfg.out};
  const auto sentences = corpus_sentences(cfg);
  NGramOptions opts;
  opts.order = cfg.ngram_order;
  opts.unk_singletons = cfg.unk_singletons;
  const auto model = NGramModel::train(sentences, opts);
  for (const auto& w : model.warnings()) log << "warning: " << w << '\n';
  const std::string name = cfg.model == "ngram" ? cfg.effective_model_name() : fmt::format("ngram{}", cfg.ngram_order);
  put(layout.model(name), model.serialize());
  log << fmt::format("train-ngram: order {}, {} sentences -> {}\n", model.order(), sentences.size(), layout.model(name));
}

void cmd_score(const RunConfig& cfg, const std::vector<std::string>& suite_ids, std::ostream& log) {
  const Layout layout{cfg.out};
  const std::string name = cfg.effective_model_name();
  const auto ids = generated_suites(layout, suite_ids);

  if (cfg.model == "ngram") {
    require(layout.model(name), "model file", "train-ngram");
    const auto model = NGramModel::deserialize(read_file(layout.model(name)));
    for (const auto& id : ids) {
      const auto suite = read_suite_file(layout.suite(id));
      auto s = sentences_of(suite);
      auto scored = s.tokens;
      if (cfg.lowercase)
        for (auto& sent : scored)
          for (auto& tok : sent) tok = to_lower(tok);
      auto table = model.score_sentences(scored, s.ids, cfg.jobs);
      for (std::size_t i = 0; i < table.size(); ++i) table[i].tokens = s.tokens[i];
      put(layout.surprisals(id, name), write_surprisal_text(table));
      log << fmt::format("score: {} sentences -> {}\n", table.size(), layout.surprisals(id, name));
    }
  } else if (cfg.model == "subprocess") {
    if (cfg.scorer_command.empty()) throw Error(ErrorCategory::usage, "config key 'scorer_command' is not set");
    SubprocessActionModel model(cfg.scorer_command);
    for (const auto& id : ids) {
      const auto suite = read_suite_file(layout.suite(id));
      const auto s = sentences_of(suite);
      SurprisalTable table;
      for (std::size_t i = 0; i < s.tokens.size(); ++i) {
        const auto m = word_sync_beam(model, s.tokens[i], cfg.beam);
        table.push_back({s.ids[i], s.tokens[i], m.surprisals});
      }
      put(layout.surprisals(id, name), write_surprisal_text(table));
      log << fmt::format("score: {} sentences -> {}\n", table.size(), layout.surprisals(id, name));
    }
  } else {
    require_input(cfg.adapter_file, "adapter_file");
    const auto all = read_surprisal_file(cfg.adapter_file);
    for (const auto& id : ids) {
      const std::string prefix = id + "-";
      SurprisalTable table;
      for (const auto& r : all)
        if (r.sentence_id.starts_with(prefix)) table.push_back(r);
      put(layout.surprisals(id, name), write_surprisal_text(table));
      log << fmt::format("score: {} adapter records -> {}\n", table.size(), layout.surprisals(id, name));
    }
  }
}

void cmd_eval(const RunConfig& cfg, const std::vector<std::string>& suite_ids, const std::string& surprisal_file,
              std::ostream& log) {
  const Layout layout{cfg.out};
  const std::string name = cfg.effective_model_name();
  const auto ids = generated_suites(layout, suite_ids);
  if (!surprisal_file.empty() && ids.size() != 1)
    throw Error(ErrorCategory::usage, "an explicit surprisal file needs exactly one suite");
  for (const auto& id : ids) {
    const auto suite = read_suite_file(layout.suite(id));
    std::string path = surprisal_file;
    if (path.empty()) {
      path = layout.surprisals(id, name);
      require(path, "surprisal file", "score");
    } else {
      require_input(path, "surprisal file");
    }
    const auto records = read_surprisal_file(path);
    auto items = score_items(suite, records, cfg.epsilon_tie);
    const auto result = aggregate(suite, std::move(items), name, cfg.ci_level);
    put(layout.eval(id, name), write_eval_csv(result));
    put(layout.eval_items(id, name), write_items_csv(result));
    const auto& all = result.rows.back().summary;
    log << fmt::format("eval: {} {}: {}/{} correct\n", id, name, all.k, all.n);
  }
}

void cmd_analyze(const RunConfig& cfg, std::ostream& log) {
  const Layout layout{cfg.out};
  const auto files = files_with_suffix(layout.eval_dir(), ".items.csv");
  if (files.empty()) throw Error(ErrorCategory::usage, fmt::format("no item results in '{}' (run `synprobe eval` first)", layout.eval_dir()));
  std::vector<ItemRow> items;
  for (const auto& f : files) {
    auto rows = read_items_csv(read_file(f));
    items.insert(items.end(), std::make_move_iterator(rows.begin()), std::make_move_iterator(rows.end()));
  }
  const auto ref = pick_reference_model(items, cfg.reference_model);
  const auto result = analyze(items, ref);
  for (const auto& f : result.fits)
    if (f.status != "ok") log << fmt::format("warning: {} {} {}: fit failed ({})\n", f.suite, f.model, f.analysis, f.status);
  put(layout.fits(), write_fits_csv(result.fits));
  put(layout.curves(), write_curves_csv(result.curves));
  log << fmt::format("analyze: {} fit rows, {} curve points\n", result.fits.size(), result.curves.size());
}

void cmd_report(const RunConfig& cfg, std::ostream& log) {
  const Layout layout{cfg.out};
  std::vector<EvalRow> rows;
  for (const auto& f : files_with_suffix(layout.eval_dir(), ".csv")) {
    if (f.ends_with(".items.csv")) continue;
    auto r = read_eval_csv(read_file(f));
    rows.insert(rows.end(), r.begin(), r.end());
  }
  if (rows.empty()) throw Error(ErrorCategory::usage, fmt::format("no eval results in '{}' (run `synprobe eval` first)", layout.eval_dir()));
  require(layout.fits(), "fits table", "analyze");
  require(layout.curves(), "curves table", "analyze");
  const auto fits = read_fits_csv(read_file(layout.fits()));
  const auto curves = read_curves_csv(read_file(layout.curves()));

  std::string ref = cfg.reference_model;
  if (ref.empty()) {
    std::set<std::string> models;
    for (const auto& r : rows) models.insert(r.model);
    ref = *models.begin();
  }
  const auto table = build_table1(rows, fits, ref, cfg.alpha);
  put(under(layout.report_dir(), "table1.csv"), write_table1_csv(table));
  put(under(layout.report_dir(), "table1.txt"),
      write_table1_text(table) +
          fmt::format("\nabove chance: buckets with one-sided exact binomial p < {} (k/n buckets)\n"
                      "supervision: fixed-effects logistic GLM, cluster-robust SEs by item, reference {}\n",
                      format_double(cfg.alpha), ref));
  for (const auto& suite : table.suites)
    put(under(layout.report_dir(), "charts/" + suite + ".vl.json"), chart_spec(suite, rows, curves));
  log << fmt::format("report: {} suites, {} models -> {}\n", table.suites.size(), table.models.size(),
                     layout.report_dir());
}

}  // namespace synprobe
