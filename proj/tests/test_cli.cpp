#include <set>

#include "doctest.h"
#include "support.hpp"
#include "synprobe/config.hpp"
#include "synprobe/error.hpp"

namespace fs = std::filesystem;
using testing::run;

namespace {

const std::string kCli = SYNPROBE_CLI;

std::string base_args(const std::string& out) {
  return kCli + " --config " + testing::data_path("config.yaml") + " --out " + out +
         " --set words_per_category=4 --set frames_per_word=2";
}

void pipeline(const std::string& out, const std::string& extra) {
  const std::string args = base_args(out) + " " + extra + " ";
  for (const char* cmd : {"ingest", "stats", "gen number_base_simple number_transformed_modifier argstruct_passive_short",
                          "train-ngram", "score", "eval", "analyze", "report"}) {
    const auto r = run(args + cmd);
    CAPTURE(cmd);
    CAPTURE(r.output);
    REQUIRE(r.exit_code == 0);
  }
}

std::set<std::string> files_under(const fs::path& root) {
  std::set<std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out.insert(fs::relative(e.path(), root).string());
  return out;
}

}  // namespace

TEST_CASE("pipeline output is deterministic") {
  testing::TempDir tmp("cli");
  pipeline(tmp.str("a"), "");
  pipeline(tmp.str("b"), "--jobs 4");
  const auto fa = files_under(tmp.path() / "a");
  const auto fb = files_under(tmp.path() / "b");
  CHECK(fa == fb);
  for (const char* f : {"lexicon.tsv", "stats/summary.txt", "suites/number_base_simple.jsonl", "models/ngram5.txt",
                        "surprisals/number_base_simple.ngram5.tsv", "eval/number_base_simple.ngram5.csv",
                        "analysis/fits.csv", "report/table1.txt", "report/charts/number_base_simple.vl.json"})
    CHECK(fa.count(f) == 1);
  for (const auto& f : fa) {
    CAPTURE(f);
    CHECK(testing::slurp(tmp.path() / "a" / f) == testing::slurp(tmp.path() / "b" / f));
  }

  SUBCASE("a different seed changes the suites") {
    const auto r = run(base_args(tmp.str("c")) + " --seed 8 ingest && " + base_args(tmp.str("c")) +
                       " --seed 8 gen number_base_simple");
    REQUIRE(r.exit_code == 0);
    CHECK(testing::slurp(tmp.path() / "c/suites/number_base_simple.jsonl") !=
          testing::slurp(tmp.path() / "a/suites/number_base_simple.jsonl"));
  }

  SUBCASE("mismatched surprisals are an alignment error") {
    auto text = testing::slurp(tmp.path() / "a/surprisals/number_base_simple.ngram5.tsv");
    const auto pos = text.find("\tis\t");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 4, "\tIS\t");
    std::ofstream(tmp.path() / "bad.tsv") << text;
    const auto r = run(base_args(tmp.str("a")) + " eval number_base_simple --surprisals " + tmp.str("bad.tsv"));
    CHECK(r.exit_code == 5);
    CHECK(r.output.find("error[alignment]") != std::string::npos);
  }

  SUBCASE("an explicit surprisal file needs one suite") {
    const auto r = run(base_args(tmp.str("a")) + " eval --surprisals " +
                       tmp.str("a/surprisals/number_base_simple.ngram5.tsv"));
    CHECK(r.exit_code == 2);
  }

  SUBCASE("the table lists every generated suite") {
    const auto table = testing::slurp(tmp.path() / "a/report/table1.csv");
    for (const char* s : {"number_base_simple", "number_transformed_modifier", "argstruct_passive_short"})
      CHECK(table.find(s) != std::string::npos);
  }
}

TEST_CASE("missing upstream artifacts are usage errors") {
  testing::TempDir tmp("cli-missing");
  for (const char* cmd : {"stats", "gen", "score", "eval", "analyze", "report"}) {
    const auto r = run(base_args(tmp.str()) + " " + cmd);
    CAPTURE(cmd);
    CAPTURE(r.output);
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("error[usage]") != std::string::npos);
    CHECK(r.output.find("first") != std::string::npos);
  }
}

TEST_CASE("argument and configuration errors") {
  struct Case {
    std::string args;
    int code;
    const char* token;
  };
  const std::vector<Case> cases{
      {"", 2, "usage"},
      {"frobnicate", 2, "usage"},
      {"--jobs 0 ingest", 2, "usage"},
      {"--set bogus=1 ingest", 2, "usage"},
      {"--set ngram_order=0 ingest", 2, "usage"},
      {"--set seed=abc ingest", 2, "usage"},
      {"--config /nonexistent/run.yaml ingest", 3, "io"},
  };
  for (const auto& c : cases) {
    const auto r = run(kCli + " " + c.args);
    CAPTURE(c.args);
    CAPTURE(r.output);
    CHECK(r.exit_code == c.code);
    CHECK(r.output.find(std::string("error[") + c.token + "]") != std::string::npos);
  }
  const auto env = run("SP_NGRAM_ORDER=0 " + kCli + " ingest");
  CHECK(env.exit_code == 2);
  CHECK(run(kCli + " --help").exit_code == 0);
}

TEST_CASE("malformed corpus input") {
  testing::TempDir tmp("cli-parse");
  std::ofstream(tmp.path() / "bad.mrg") << "(S (NP (DT The) (NN dog)) (VP (VBZ barks))\n";
  const auto r = run(kCli + " --out " + tmp.str("out") + " --set corpus=" + tmp.str("bad.mrg") + " ingest");
  CHECK(r.exit_code == 4);
  CHECK(r.output.find("error[parse]") != std::string::npos);
  CHECK(r.output.find("offset 0") != std::string::npos);
}

TEST_CASE("scoring through an external scorer") {
  testing::TempDir tmp("cli-subprocess");
  fs::create_directories(tmp.path() / "suites");
  fs::copy_file(testing::fixture_path("suites/pcfg_agreement.jsonl"), tmp.path() / "suites/pcfg_agreement.jsonl");
  const std::string args = kCli + " --out " + tmp.str() + " --set model=subprocess --set model_name=pcfg" +
                           " --set 'scorer_command=" + SYNPROBE_PCFG_SCORER + " " +
                           testing::fixture_path("agreement.pcfg") + "' ";
  auto r = run(args + "score");
  CAPTURE(r.output);
  REQUIRE(r.exit_code == 0);
  r = run(args + "eval");
  REQUIRE(r.exit_code == 0);
  const auto eval = testing::slurp(tmp.path() / "eval/pcfg_agreement.pcfg.csv");
  CHECK(eval.find("pcfg_agreement,pcfg,all,all,4,4,1,") != std::string::npos);

  const auto bits = testing::slurp(tmp.path() / "surprisals/pcfg_agreement.pcfg.tsv");
  // p(barks | the dog) = 0.45 / 0.5 * 0.5
  CHECK(bits.find("pcfg_agreement-2-singular-dog-00.grammatical\t2\tbarks\t1.15200309344505") !=
        std::string::npos);

  const auto broken = run(kCli + " --out " + tmp.str() + " --set model=subprocess --set model_name=x" +
                          " --set 'scorer_command=" + SYNPROBE_PCFG_SCORER + " /nonexistent.pcfg' score");
  CHECK(broken.exit_code != 0);
  CHECK(broken.output.find("error[") != std::string::npos);
}

TEST_CASE("adapter scores") {
  testing::TempDir tmp("cli-adapter");
  fs::create_directories(tmp.path() / "suites");
  fs::copy_file(testing::fixture_path("suites/pcfg_agreement.jsonl"), tmp.path() / "suites/pcfg_agreement.jsonl");
  std::ofstream adapter(tmp.path() / "lm.tsv");
  adapter << "#syntax-probe-surprisal v1 base=2\n";
  for (const char* t : {"dog barks bark", "cat sleeps sleep", "dogs bark barks", "cats sleep sleeps"}) {
    std::istringstream in(t);
    std::string noun, good, bad;
    in >> noun >> good >> bad;
    const std::string cat = noun.back() == 's' ? "plural" : "singular";
    const std::string id = "pcfg_agreement-2-" + cat + "-" + noun + "-00";
    adapter << id << ".grammatical\t0\tthe\t1\n" << id << ".grammatical\t1\t" << noun << "\t5\n"
            << id << ".grammatical\t2\t" << good << "\t3\n";
    adapter << id << ".ungrammatical\t0\tthe\t1\n" << id << ".ungrammatical\t1\t" << noun << "\t5\n"
            << id << ".ungrammatical\t2\t" << bad << "\t" << (cat == "plural" ? "2" : "4") << "\n";
  }
  adapter << "other-suite-item.grammatical\t0\tx\t1\n";
  adapter.close();
  const std::string args = kCli + " --out " + tmp.str() + " --set model=adapter --set model_name=lm" +
                           " --set adapter_file=" + tmp.str("lm.tsv") + " ";
  REQUIRE(run(args + "score").exit_code == 0);
  REQUIRE(run(args + "eval").exit_code == 0);
  const auto eval = testing::slurp(tmp.path() / "eval/pcfg_agreement.lm.csv");
  CHECK(eval.find("pcfg_agreement,lm,2,singular,2,2,") != std::string::npos);
  CHECK(eval.find("pcfg_agreement,lm,2,plural,2,0,") != std::string::npos);
}

TEST_CASE("configuration precedence") {
  testing::TempDir tmp("cli-config");
  std::ofstream(tmp.path() / "run.yaml") << "corpus: [a.mrg, b.mrg]\nseed: 3\nngram_order: 4\n"
                                            "buckets: [2, 10]\nscorer_command: [python3, scorer.py]\n";
  auto cfg = synprobe::load_config(tmp.str("run.yaml"), {{"SP_NGRAM_ORDER", "3"}});
  CHECK(cfg.corpus == std::vector<std::string>{tmp.str("a.mrg"), tmp.str("b.mrg")});
  CHECK(cfg.seed == 3u);
  CHECK(cfg.ngram_order == 3);
  CHECK(cfg.buckets == std::vector<int>{2, 10});
  CHECK(cfg.scorer_command.size() == 2);
  synprobe::set_config_value(cfg, "ngram_order", "2");
  CHECK(cfg.ngram_order == 2);
  synprobe::set_config_value(cfg, "scorer_command", "a  b c");
  CHECK(cfg.scorer_command == std::vector<std::string>{"a", "b", "c"});
  synprobe::validate_config(cfg);
  auto odd = cfg;
  synprobe::set_config_value(odd, "buckets", "2,7");
  CHECK_THROWS_AS(synprobe::validate_config(odd), synprobe::Error);
  CHECK_THROWS_AS(synprobe::set_config_value(cfg, "nope", "1"), synprobe::Error);

  std::ofstream(tmp.path() / "bad.yaml") << "seed: [1\n";
  CHECK_THROWS_AS(synprobe::load_config(tmp.str("bad.yaml")), synprobe::Error);
  std::ofstream(tmp.path() / "unknown.yaml") << "colour: red\n";
  CHECK_THROWS_AS(synprobe::load_config(tmp.str("unknown.yaml")), synprobe::Error);
  for (const auto& key : synprobe::config_keys()) CHECK_FALSE(key.empty());
}
