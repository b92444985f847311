#pragma once

#include <cstdio>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace synprobe {

// Top-down transition system: NT(X) opens X, GEN(w) emits w, REDUCE closes
// the innermost open nonterminal.
struct Action {
  enum class Kind { nt, gen, reduce };
  Kind kind = Kind::reduce;
  std::string symbol;  // label for NT, word for GEN

  static Action nt(std::string label) { return {Kind::nt, std::move(label)}; }
  static Action gen(std::string word) { return {Kind::gen, std::move(word)}; }
  static Action reduce() { return {Kind::reduce, {}}; }

  friend bool operator==(const Action&, const Action&) = default;
};

std::string to_string(const Action& a);  // NT(X), GEN(w), REDUCE
Action parse_action(std::string_view s);

struct ScoredAction {
  Action action;
  double logprob;  // log2
};

struct OpenNode {
  std::string label;
  std::vector<std::string> children;  // child labels, or words for GEN children
};

struct ParserState {
  std::vector<OpenNode> stack;
  std::size_t position = 0;  // index of the next word
  std::vector<Action> history;
  double logprob = 0.0;  // log2
  bool started = false;
  bool finished = false;  // root closed

  // Applies `a`; throws Error(search) when it is illegal in this state.
  void apply(const ScoredAction& a);
  bool legal(const Action& a) const;
  // Bracketed rendering of the (possibly partial) history.
  std::string bracketed() const;
};

/// Returns every legal next action with log2 scores normalized over the
/// legal set. `next_word` is a hint; GEN actions for other words may still
/// be returned. Implementations must be deterministic.
class ActionModel {
 public:
  virtual ~ActionModel() = default;
  virtual std::vector<ScoredAction> next_actions(const ParserState& state,
                                                 std::optional<std::string_view> next_word) = 0;
};

struct Rule {
  std::string lhs;
  std::vector<std::string> rhs;
  double prob;
};

/// Probabilistic CFG read from lines `P LHS -> RHS...`. The first rule's
/// left-hand side is the start symbol; symbols never used as a left-hand
/// side are terminals.
class ToyPCFG {
 public:
  static ToyPCFG parse(std::string_view text);
  static ToyPCFG read_file(const std::string& path);
  // Validates and builds the grammar; throws Error(format) when invalid.
  explicit ToyPCFG(std::vector<Rule> rules);

  const std::string& start() const noexcept { return start_; }
  const std::vector<Rule>& rules() const noexcept { return rules_; }
  bool is_nonterminal(std::string_view s) const;
  std::vector<std::size_t> rules_for(std::string_view lhs) const;
  std::string to_text() const;

 private:
  std::vector<Rule> rules_;
  std::string start_;
  std::map<std::string, std::vector<std::size_t>, std::less<>> by_lhs_;
};

/// Action model whose complete action sequences score exactly the PCFG
/// derivation probability. Rule choice factorizes over RHS prefixes.
class PcfgActionModel : public ActionModel {
 public:
  explicit PcfgActionModel(ToyPCFG grammar);
  const ToyPCFG& grammar() const noexcept { return grammar_; }
  std::vector<ScoredAction> next_actions(const ParserState& state,
                                         std::optional<std::string_view> next_word) override;

 private:
  ToyPCFG grammar_;
};

struct BeamOptions {
  std::size_t word_beam_k = 100;
  std::size_t action_beam_k = 1000;
  std::size_t fast_track_k = 5;
  std::size_t max_structural_per_word = 200;
};

struct PrefixMarginal {
  std::vector<double> marginals;   // log2 prefix probability after each word
  std::vector<double> surprisals;  // bits
  double sentence_logprob = 0.0;   // log2, closing every open constituent
  std::string top_parse;           // empty when no surviving state can be closed
};

/// Word-synchronous beam search. Throws SearchError when every hypothesis
/// dies before a word is generated.
PrefixMarginal word_sync_beam(ActionModel& model, const std::vector<std::string>& sentence,
                              const BeamOptions& options = {});

/// Exhaustive enumeration of action prefixes. Words outside the language
/// yield -inf from that word on. Throws Error(oracle_infeasible) when a word
/// step needs more than `max_structural_per_word` structural actions.
PrefixMarginal exact_marginal(ActionModel& model, const std::vector<std::string>& sentence,
                              std::size_t max_structural_per_word = 64);

/// Log2 probability of the derivation described by a bracketed tree.
double derivation_logprob(ActionModel& model, const std::vector<Action>& actions);

inline constexpr std::string_view kScorerHeader = "#syntax-probe-scorer v1";

/// Request: `<next word or empty><TAB><space-separated action history>`.
/// Response: `<action><TAB><log2 prob>` pairs, all on one tab-separated
/// line; an empty line means no legal action; `ERR<TAB>message` fails.
std::string encode_scorer_request(const ParserState& state, std::optional<std::string_view> next_word);
std::string encode_scorer_response(const std::vector<ScoredAction>& actions);
std::vector<ScoredAction> decode_scorer_response(std::string_view line);

/// Runs the protocol against `model` on the given streams until EOF.
void serve_scorer(ActionModel& model, std::FILE* in, std::FILE* out);

/// Spawns an external scorer and speaks the protocol over its stdin/stdout.
class SubprocessActionModel : public ActionModel {
 public:
  explicit SubprocessActionModel(std::vector<std::string> argv);
  ~SubprocessActionModel() override;
  SubprocessActionModel(const SubprocessActionModel&) = delete;
  SubprocessActionModel& operator=(const SubprocessActionModel&) = delete;

  std::vector<ScoredAction> next_actions(const ParserState& state,
                                         std::optional<std::string_view> next_word) override;

 private:
  int pid_ = -1;
  std::FILE* to_child_ = nullptr;
  std::FILE* from_child_ = nullptr;
};

}  // namespace synprobe
