#include <algorithm>
#include <random>

#include "doctest.h"
#include "support.hpp"
#include "synprobe/error.hpp"
#include "synprobe/exposure.hpp"
#include "synprobe/lexicon.hpp"
#include "synprobe/tree.hpp"

using namespace synprobe;

namespace {

const char* kSmall =
    "( (S (NP-SBJ (DT The) (NN man)) (VP (VBD saw) (NP (DT the) (NN dog))) (. .)) )\n"
    "(S (NP (DT The) (NNS dogs)) (VP (VBD slept)) (. .))\n"
    "(SQ (VBZ Is) (NP (DT the) (NN dog)) (ADJP (JJ big)) (. ?))\n"
    "(S (NP (DT The) (NN dog)) (VP (VBD was) (VP (VBN seen) (NP (-NONE- *-1)))) (. .))\n"
    "(S (NP (DT The) (NN man)) (VP (MD can) (VP (VB see) (NP (DT the) (NNS dogs)))) (. .))\n";

// Independent restatement of the bucket boundaries.
int oracle_bucket(int c) {
  if (c >= 2 && c <= 5) return c;
  if (c >= 6 && c <= 10) return 10;
  if (c >= 11 && c <= 20) return 20;
  if (c >= 21 && c <= 30) return 30;
  if (c >= 50 && c <= 100) return 100;
  return 0;
}

}  // namespace

TEST_CASE("treebank parsing") {
  const auto trees = parse_treebank(kSmall);
  REQUIRE(trees.size() == 5);
  CHECK(trees[0].label == "S");
  CHECK(trees[0].terminal_count() == 6);
  CHECK(trees[0].terminals()[2] == Terminal{"saw", "VBD"});

  SUBCASE("round trip") {
    for (const auto& t : trees) {
      const auto back = parse_treebank(to_string(t));
      REQUIRE(back.size() == 1);
      CHECK(back[0] == t);
    }
  }
  SUBCASE("function tags") {
    CHECK(base_label("NP-SBJ-1") == "NP");
    CHECK(base_label("-NONE-") == "-NONE-");
    CHECK(base_label("PP=2") == "PP");
  }
  SUBCASE("malformed input reports an offset") {
    try {
      parse_treebank("(S (NP (DT a)) ");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.offset() == 0);
      CHECK(e.category() == ErrorCategory::parse);
    }
    CHECK_THROWS_AS(parse_treebank("(S (NP a (DT b)))"), ParseError);
    CHECK_THROWS_AS(parse_treebank("( (S (DT a)) (S (DT b)) )"), ParseError);
    CHECK_THROWS_AS(parse_treebank("(S (DT a)))"), ParseError);
  }
}

TEST_CASE("exposure buckets partition 0..200") {
  for (int c = 0; c <= 200; ++c) {
    const auto b = exposure_bucket(c);
    CAPTURE(c);
    CHECK(b.has_value() == (oracle_bucket(c) != 0));
    if (b) {
      CHECK(b->id == oracle_bucket(c));
      CHECK(b->contains(c));
    }
  }
  CHECK_FALSE(exposure_bucket(1));
  CHECK_FALSE(exposure_bucket(31));
  CHECK_FALSE(exposure_bucket(49));
  CHECK_FALSE(exposure_bucket(101));
  CHECK(bucket_by_id(100)->lo == 50);
  CHECK_FALSE(bucket_by_id(7));
}

TEST_CASE("lexicon counts") {
  const auto trees = parse_treebank(kSmall);
  const auto lex = build_lexicon(trees);

  CHECK(lex.total_count("dog") == 3);
  CHECK(lex.get("dog").pos("NN") == 3);
  CHECK(lex.get("dog").inverted == 1);
  CHECK(lex.get("man").inverted == 0);
  CHECK(lex.get("saw").object_present == 1);
  CHECK(lex.get("slept").object_absent == 1);
  CHECK(lex.get("see").object_present == 1);
  CHECK(lex.get("seen").vbn == 1);
  CHECK_FALSE(lex.contains("*-1"));
  CHECK(lex.total_count("missing") == 0);

  SUBCASE("additive over concatenation") {
    std::vector<Tree> a(trees.begin(), trees.begin() + 2), b(trees.begin() + 2, trees.end());
    auto sum = build_lexicon(a);
    sum += build_lexicon(b, {}, nullptr, 2);
    CHECK(sum == lex);
  }
  SUBCASE("table round trip") {
    const auto text = write_lexicon_table(lex);
    CHECK(read_lexicon_table(text) == lex);
    CHECK(write_lexicon_table(read_lexicon_table(text)) == text);
  }
  SUBCASE("punctuation tags survive the table") {
    const auto t = parse_treebank("(S (NP (NN x)) (, ,) (: ;) (. .))");
    const auto l = build_lexicon(t);
    CHECK(read_lexicon_table(write_lexicon_table(l)) == l);
  }
  SUBCASE("lowercasing") {
    LexiconOptions opt;
    opt.lowercase = true;
    CHECK(build_lexicon(trees, opt).total_count("the") == 7);
    CHECK(lex.total_count("the") == 3);
  }
}

TEST_CASE("lexicon additivity on random splits of the toy treebank") {
  const auto trees = read_treebank_files({testing::data_path("toy_treebank.mrg")});
  REQUIRE(trees.size() > 1000);
  const std::vector<Tree> sample(trees.begin(), trees.begin() + 1000);
  const auto whole = build_lexicon(sample);
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 10; ++rep) {
    const auto cut = static_cast<std::ptrdiff_t>(rng() % sample.size());
    std::vector<Tree> a(sample.begin(), sample.begin() + cut), b(sample.begin() + cut, sample.end());
    auto sum = build_lexicon(a);
    sum += build_lexicon(b, {}, nullptr, cut);
    CHECK(sum == whole);
  }
}

TEST_CASE("transitivity classification") {
  LexiconStats lex;
  auto set = [&](const std::string& w, int with, int without) {
    auto& s = lex.at_or_insert(w);
    s.total_count = with + without;
    s.pos_counts["VBD"] = with + without;
    s.object_present = with;
    s.object_absent = without;
  };
  set("hit", 10, 0);
  set("push", 9, 1);
  set("eat", 6, 4);
  set("sleep", 0, 10);
  set("run", 1, 9);
  set("sit", 2, 8);
  const auto ext = read_transitivity_lexicon(
      "hit\ttransitive\npush\ttransitive\neat\ttransitive\nsleep\tintransitive\n"
      "run\tintransitive\nsit\tintransitive\nghost\ttransitive\n");
  REQUIRE(ext.size() == 7);

  const auto d = classify_transitivity(lex, ext);
  CHECK(d.at("hit").cls == TransitivityClass::transitive);
  CHECK(d.at("push").cls == TransitivityClass::transitive);
  CHECK(d.at("eat").cls == TransitivityClass::excluded);
  CHECK(d.at("eat").reason == "threshold");
  CHECK(d.at("eat").object_fraction == doctest::Approx(0.6));
  CHECK(d.at("sleep").cls == TransitivityClass::intransitive);
  CHECK(d.at("run").cls == TransitivityClass::intransitive);
  CHECK(d.at("sit").cls == TransitivityClass::excluded);
  CHECK(d.at("ghost").reason == "absent-from-corpus");

  SUBCASE("raising the threshold never adds verbs") {
    std::size_t prev = SIZE_MAX;
    for (double hi = 0.5; hi <= 1.0; hi += 0.05) {
      std::size_t kept = 0;
      for (const auto& [v, dec] : classify_transitivity(lex, ext, hi, 0.1))
        kept += dec.cls != TransitivityClass::excluded;
      CHECK(kept <= prev);
      prev = kept;
    }
  }
  CHECK_THROWS_AS(read_transitivity_lexicon("hit\tditransitive\n"), Error);
}

TEST_CASE("polar overlap and active-only filters") {
  const auto lex = build_lexicon(parse_treebank(kSmall));
  const std::vector<std::string> nouns{"dog", "dogs", "man"};
  const auto r = filter_polar_overlap(nouns, lex);
  CHECK(r.removed == std::vector<std::string>{"dog"});
  CHECK(r.kept == std::vector<std::string>{"dogs", "man"});

  const auto active = active_only_verbs(lex);
  CHECK(std::find(active.begin(), active.end(), "saw") != active.end());
  CHECK(std::find(active.begin(), active.end(), "slept") != active.end());
  CHECK(std::find(active.begin(), active.end(), "seen") == active.end());

  const auto irregular = read_irregular_verbs("see\tsaw\tseen\n");
  CHECK(irregular.count("saw") == 1);
  const auto filtered = active_only_verbs(lex, irregular);
  CHECK(std::find(filtered.begin(), filtered.end(), "saw") == filtered.end());

  CHECK(vbn_fraction(lex, "seen") == doctest::Approx(1.0));
  CHECK(vbn_fraction(lex, "saw") == doctest::Approx(0.0));
  CHECK_THROWS_AS(vbn_fraction(lex, "absent"), Error);
}
