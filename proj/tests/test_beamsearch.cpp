#include <chrono>
#include <cmath>
#include <random>

#include "doctest.h"
#include "support.hpp"
#include "synprobe/beam.hpp"
#include "synprobe/error.hpp"

using namespace synprobe;
using Words = std::vector<std::string>;

namespace {

ToyPCFG toy_grammar() { return ToyPCFG::read_file(testing::fixture_path("toy.pcfg")); }

BeamOptions all_live() {
  BeamOptions o;
  o.word_beam_k = 1000000;
  o.action_beam_k = 1000000;
  o.fast_track_k = 1000000;
  o.max_structural_per_word = 10000;
  return o;
}

}  // namespace

TEST_CASE("action text form") {
  for (const auto& a : {Action::nt("NP"), Action::gen("dog"), Action::reduce()}) CHECK(parse_action(to_string(a)) == a);
  CHECK(to_string(Action::nt("S")) == "NT(S)");
  CHECK(to_string(Action::gen("x")) == "GEN(x)");
  CHECK(to_string(Action::reduce()) == "REDUCE");
  CHECK_THROWS_AS(parse_action("SHIFT"), Error);
  CHECK_THROWS_AS(parse_action("NT()"), Error);
}

TEST_CASE("grammar loading") {
  const auto g = toy_grammar();
  CHECK(g.start() == "S");
  CHECK(g.rules().size() == 9);
  CHECK(g.is_nonterminal("NP"));
  CHECK_FALSE(g.is_nonterminal("dog"));
  CHECK(g.rules_for("N").size() == 2);
  CHECK(ToyPCFG::parse(g.to_text()).to_text() == g.to_text());

  CHECK_THROWS_AS(ToyPCFG::parse("0.5 S -> a\n0.4 S -> b\n"), Error);
  CHECK_THROWS_AS(ToyPCFG::parse("1.0 S a\n"), Error);
  CHECK_THROWS_AS(ToyPCFG::parse("0.5 S -> a\n0.5 S -> a\n"), Error);
  CHECK_THROWS_AS(ToyPCFG::parse("1.5 S -> a\n-0.5 S -> b\n"), Error);
}

TEST_CASE("parser state transitions") {
  ParserState s;
  CHECK(s.legal(Action::nt("S")));
  CHECK_FALSE(s.legal(Action::reduce()));
  CHECK_FALSE(s.legal(Action::gen("the")));
  s.apply({Action::nt("S"), -0.5});
  CHECK(s.started);
  CHECK_FALSE(s.legal(Action::reduce()));
  s.apply({Action::gen("a"), -1.0});
  CHECK(s.position == 1);
  CHECK(s.legal(Action::reduce()));
  s.apply({Action::reduce(), 0.0});
  CHECK(s.finished);
  CHECK(s.logprob == doctest::Approx(-1.5));
  CHECK(s.bracketed() == "(S a)");
  CHECK_THROWS_AS(s.apply({Action::nt("X"), 0.0}), SearchError);
}

TEST_CASE("action distributions are normalized") {
  PcfgActionModel model(toy_grammar());
  ParserState s;
  const std::vector<Action> path{Action::nt("S"), Action::nt("NP"), Action::nt("D"), Action::gen("the"),
                                 Action::reduce(), Action::nt("N"), Action::gen("dog"), Action::reduce(),
                                 Action::reduce()};
  for (const auto& a : path) {
    const auto next = model.next_actions(s, std::nullopt);
    double total = 0.0;
    double chosen = -INFINITY;
    for (const auto& sa : next) {
      total += std::exp2(sa.logprob);
      if (sa.action == a) chosen = sa.logprob;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    REQUIRE(std::isfinite(chosen));
    s.apply({a, chosen});
  }
}

TEST_CASE("hand grammar marginals") {
  PcfgActionModel model(toy_grammar());
  const Words sentence{"the", "dog", "barks"};
  const auto exact = exact_marginal(model, sentence);
  const auto beam = word_sync_beam(model, sentence, all_live());
  const double marg[] = {0.0, -1.0, -2.0};
  const double surp[] = {0.0, 1.0, 1.0};
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(std::abs(exact.marginals[i] - marg[i]) < 1e-12);
    CHECK(std::abs(exact.surprisals[i] - surp[i]) < 1e-12);
    CHECK(std::abs(beam.marginals[i] - marg[i]) < 1e-12);
    CHECK(std::abs(beam.surprisals[i] - surp[i]) < 1e-12);
  }
  CHECK(std::abs(exact.sentence_logprob + 2.0) < 1e-12);
  CHECK(std::abs(beam.sentence_logprob + 2.0) < 1e-12);
  CHECK(beam.top_parse == "(S (NP (D the) (N dog)) (VP (V barks)))");

  const std::vector<Action> derivation{Action::nt("S"),   Action::nt("D"),   Action::gen("the"),   Action::reduce(),
                                       Action::nt("N"),   Action::gen("cat"), Action::reduce(),    Action::nt("V"),
                                       Action::gen("sleeps"), Action::reduce(), Action::reduce()};
  CHECK(derivation_logprob(model, derivation) == doctest::Approx(std::log2(0.4 * 0.5 * 0.5)));
}

TEST_CASE("words outside the language") {
  PcfgActionModel model(toy_grammar());
  const Words sentence{"the", "dog", "meows"};
  const auto exact = exact_marginal(model, sentence);
  CHECK(std::isfinite(exact.marginals[1]));
  CHECK(std::isinf(exact.marginals[2]));
  CHECK(exact.marginals[2] < 0);
  try {
    word_sync_beam(model, sentence, all_live());
    FAIL("expected a search error");
  } catch (const SearchError& e) {
    CHECK(e.word_index() == 2);
  }
}

TEST_CASE("exhaustive beam equals exact enumeration on random grammars") {
  std::mt19937_64 rng(20190601);
  const auto t0 = std::chrono::steady_clock::now();
  int compared = 0;
  for (int g = 0; g < 20; ++g) {
    const auto grammar = testing::random_pcfg(rng, 5);
    PcfgActionModel model(grammar);
    for (int s = 0; s < 3; ++s) {
      auto sentence = testing::sample_sentence(grammar, rng);
      if (sentence.size() > 8) sentence.resize(8);
      const auto exact = exact_marginal(model, sentence, 10000);
      const auto beam = word_sync_beam(model, sentence, all_live());
      BeamOptions narrow;
      narrow.word_beam_k = 1;
      narrow.action_beam_k = 10;
      narrow.fast_track_k = 1;
      // A pruned beam can lose every hypothesis; its marginal is then -inf.
      std::vector<double> greedy(sentence.size(), -INFINITY);
      try {
        greedy = word_sync_beam(model, sentence, narrow).marginals;
      } catch (const SearchError&) {
      }
      REQUIRE(exact.marginals.size() == sentence.size());
      for (std::size_t i = 0; i < sentence.size(); ++i) {
        CAPTURE(g);
        CAPTURE(i);
        CHECK(std::abs(beam.marginals[i] - exact.marginals[i]) < 1e-9);
        CHECK(greedy[i] <= exact.marginals[i] + 1e-12);
      }
      ++compared;
    }
  }
  CHECK(compared == 60);
  CHECK(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() < 10.0);
}

TEST_CASE("structural step limit") {
  PcfgActionModel model(ToyPCFG::parse("1.0 S -> A\n1.0 A -> B\n1.0 B -> C\n1.0 C -> x\n"));
  try {
    exact_marginal(model, {"x"}, 2);
    FAIL("expected an infeasible oracle");
  } catch (const Error& e) {
    CHECK(e.category() == ErrorCategory::oracle_infeasible);
  }
  CHECK(exact_marginal(model, {"x"}, 10).marginals[0] == doctest::Approx(0.0));
}

TEST_CASE("scorer protocol") {
  ParserState s;
  s.apply({Action::nt("S"), -0.5});
  s.apply({Action::nt("NP"), -1.0});
  CHECK(encode_scorer_request(s, std::string_view("dog")) == "dog\tNT(S) NT(NP)");
  CHECK(encode_scorer_request(ParserState{}, std::nullopt) == "\t");

  const std::vector<ScoredAction> actions{{Action::gen("dog"), -1.0}, {Action::reduce(), -0.25}};
  const auto back = decode_scorer_response(encode_scorer_response(actions));
  REQUIRE(back.size() == 2);
  CHECK(back[0].action == actions[0].action);
  CHECK(back[1].logprob == -0.25);
  CHECK(decode_scorer_response("").empty());
  try {
    decode_scorer_response("ERR\tbroken");
    FAIL("expected a protocol error");
  } catch (const Error& e) {
    CHECK(e.category() == ErrorCategory::protocol);
  }
  CHECK_THROWS_AS(decode_scorer_response("GEN(x)\tnot-a-number"), Error);

  SUBCASE("serving over streams") {
    PcfgActionModel model(toy_grammar());
    std::FILE* in = std::tmpfile();
    std::FILE* out = std::tmpfile();
    std::fputs("\t\nthe\tNT(S)\n", in);
    std::rewind(in);
    serve_scorer(model, in, out);
    std::rewind(out);
    char buf[4096];
    std::string text;
    while (std::fgets(buf, sizeof buf, out)) text += buf;
    std::fclose(in);
    std::fclose(out);
    CHECK(text.rfind(std::string(kScorerHeader) + "\n", 0) == 0);
    CHECK(text.find("NT(S)\t0\n") != std::string::npos);
  }
}

TEST_CASE("subprocess scorer matches the in-process model") {
  PcfgActionModel local(toy_grammar());
  SubprocessActionModel remote({SYNPROBE_PCFG_SCORER, testing::fixture_path("toy.pcfg")});
  for (const Words& sentence : {Words{"the", "dog", "barks"}, Words{"the", "cat", "sleeps"}}) {
    const auto a = word_sync_beam(local, sentence);
    const auto b = word_sync_beam(remote, sentence);
    CHECK(a.surprisals == b.surprisals);
    CHECK(a.top_parse == b.top_parse);
  }
  CHECK_THROWS_AS(SubprocessActionModel({"/nonexistent/scorer"}).next_actions(ParserState{}, std::nullopt), Error);
}
