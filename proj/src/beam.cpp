#include "synprobe/beam.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <fcntl.h>
#include <sys/wait.h>
#include <unistd.h>

#include <fmt/format.h>

#include "synprobe/error.hpp"
#include "synprobe/text.hpp"
#include "synprobe/tree.hpp"

namespace synprobe {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log2_sum(const std::vector<ParserState>& states) {
  double m = kNegInf;
  for (const auto& s : states) m = std::max(m, s.logprob);
  if (m == kNegInf) return kNegInf;
  double acc = 0.0;
  for (const auto& s : states) acc += std::exp2(s.logprob - m);
  return m + std::log2(acc);
}

ParserState extend(const ParserState& s, const ScoredAction& a) {
  ParserState next = s;
  next.apply(a);
  return next;
}

void sort_desc(std::vector<ParserState>& v) {
  std::stable_sort(v.begin(), v.end(),
                   [](const ParserState& a, const ParserState& b) { return a.logprob > b.logprob; });
}

// Applies REDUCE until the root closes. Returns false if some step offers no REDUCE.
bool close_all(ActionModel& model, ParserState& s) {
  while (!s.finished) {
    bool reduced = false;
    for (const auto& a : model.next_actions(s, std::nullopt)) {
      if (a.action.kind == Action::Kind::reduce) {
        s.apply(a);
        reduced = true;
        break;
      }
    }
    if (!reduced) return false;
  }
  return true;
}

void fill_surprisals(PrefixMarginal& out) {
  double prev = 0.0;
  out.surprisals.clear();
  for (double m : out.marginals) {
    out.surprisals.push_back(m == kNegInf ? std::numeric_limits<double>::infinity() : prev - m);
    prev = m;
  }
}

void finish_sentence(ActionModel& model, const std::vector<ParserState>& finals, PrefixMarginal& out) {
  std::vector<ParserState> closed;
  for (const auto& s : finals) {
    ParserState c = s;
    if (close_all(model, c)) closed.push_back(std::move(c));
  }
  out.sentence_logprob = log2_sum(closed);
  if (!closed.empty()) {
    auto best = std::max_element(closed.begin(), closed.end(), [](const auto& a, const auto& b) {
      return a.logprob < b.logprob;
    });
    out.top_parse = best->bracketed();
  }
}

}  // namespace

std::string to_string(const Action& a) {
  switch (a.kind) {
    case Action::Kind::nt:
      return "NT(" + a.symbol + ")";
    case Action::Kind::gen:
      return "GEN(" + a.symbol + ")";
    case Action::Kind::reduce:
      break;
  }
  return "REDUCE";
}

Action parse_action(std::string_view s) {
  if (s == "REDUCE") return Action::reduce();
  auto inner = [&](std::string_view prefix) -> std::optional<std::string> {
    if (s.size() > prefix.size() + 1 && s.starts_with(prefix) && s.back() == ')')
      return std::string(s.substr(prefix.size(), s.size() - prefix.size() - 1));
    return std::nullopt;
  };
  if (auto x = inner("NT(")) return Action::nt(*x);
  if (auto x = inner("GEN(")) return Action::gen(*x);
  throw Error(ErrorCategory::protocol, fmt::format("malformed action '{}'", s));
}

bool ParserState::legal(const Action& a) const {
  if (finished) return false;
  switch (a.kind) {
    case Action::Kind::nt:
      return !a.symbol.empty();
    case Action::Kind::gen:
      return started && !stack.empty();
    case Action::Kind::reduce:
      return !stack.empty() && !stack.back().children.empty();
  }
  return false;
}

void ParserState::apply(const ScoredAction& a) {
  if (!legal(a.action))
    throw SearchError(position, fmt::format("illegal action {} after {} actions", to_string(a.action),
                                            history.size()));
  switch (a.action.kind) {
    case Action::Kind::nt:
      if (started) stack.back().children.push_back(a.action.symbol);
      started = true;
      stack.push_back({a.action.symbol, {}});
      break;
    case Action::Kind::gen:
      stack.back().children.push_back(a.action.symbol);
      ++position;
      break;
    case Action::Kind::reduce:
      stack.pop_back();
      if (stack.empty()) finished = true;
      break;
  }
  history.push_back(a.action);
  logprob += a.logprob;
}

std::string ParserState::bracketed() const {
  std::string out;
  for (const auto& a : history) {
    switch (a.kind) {
      case Action::Kind::nt:
        if (!out.empty()) out += ' ';
        out += '(' + a.symbol;
        break;
      case Action::Kind::gen:
        out += ' ' + a.symbol;
        break;
      case Action::Kind::reduce:
        out += ')';
        break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

ToyPCFG::ToyPCFG(std::vector<Rule> rules) : rules_(std::move(rules)) {
  if (rules_.empty()) throw Error(ErrorCategory::format, "grammar has no rules");
  start_ = rules_.front().lhs;
  std::set<std::pair<std::string, std::vector<std::string>>> seen;
  std::map<std::string, double, std::less<>> mass;
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    const Rule& r = rules_[i];
    if (r.lhs.empty() || r.rhs.empty())
      throw Error(ErrorCategory::format, fmt::format("grammar rule {}: empty side", i + 1));
    if (!(r.prob > 0.0 && r.prob <= 1.0))
      throw Error(ErrorCategory::format,
                  fmt::format("grammar rule {}: probability {} outside (0,1]", i + 1, r.prob));
    if (!seen.emplace(r.lhs, r.rhs).second)
      throw Error(ErrorCategory::format, fmt::format("grammar rule {}: duplicate rule", i + 1));
    by_lhs_[r.lhs].push_back(i);
    mass[r.lhs] += r.prob;
  }
  for (const auto& [lhs, m] : mass)
    if (std::abs(m - 1.0) > 1e-6)
      throw Error(ErrorCategory::format,
                  fmt::format("grammar: probabilities for {} sum to {}", lhs, m));
}

ToyPCFG ToyPCFG::parse(std::string_view text) {
  std::vector<Rule> rules;
  const auto lines = split_lines(text);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    std::string_view line = lines[ln];
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto f = split_ws(line);
    if (f.empty()) continue;
    if (f.size() < 4 || f[2] != "->")
      throw Error(ErrorCategory::format,
                  fmt::format("grammar line {}: expected 'P LHS -> RHS...'", ln + 1));
    Rule r{std::string(f[1]), {}, parse_double(f[0], "grammar", ln + 1)};
    for (std::size_t i = 3; i < f.size(); ++i) r.rhs.emplace_back(f[i]);
    rules.push_back(std::move(r));
  }
  return ToyPCFG(std::move(rules));
}

ToyPCFG ToyPCFG::read_file(const std::string& path) { return parse(synprobe::read_file(path)); }

bool ToyPCFG::is_nonterminal(std::string_view s) const { return by_lhs_.find(s) != by_lhs_.end(); }

std::vector<std::size_t> ToyPCFG::rules_for(std::string_view lhs) const {
  auto it = by_lhs_.find(lhs);
  return it == by_lhs_.end() ? std::vector<std::size_t>{} : it->second;
}

std::string ToyPCFG::to_text() const {
  std::string out;
  for (const auto& r : rules_) {
    out += format_double(r.prob) + ' ' + r.lhs + " ->";
    for (const auto& s : r.rhs) out += ' ' + s;
    out += '\n';
  }
  return out;
}

PcfgActionModel::PcfgActionModel(ToyPCFG grammar) : grammar_(std::move(grammar)) {}

std::vector<ScoredAction> PcfgActionModel::next_actions(const ParserState& state,
                                                        std::optional<std::string_view>) {
  if (state.finished) return {};
  if (!state.started) return {{Action::nt(grammar_.start()), 0.0}};
  const OpenNode& top = state.stack.back();
  const auto& rules = grammar_.rules();
  double total = 0.0;
  double reduce = 0.0;
  std::vector<std::pair<std::string, double>> next;
  for (std::size_t i : grammar_.rules_for(top.label)) {
    const Rule& r = rules[i];
    if (r.rhs.size() < top.children.size() ||
        !std::equal(top.children.begin(), top.children.end(), r.rhs.begin()))
      continue;
    total += r.prob;
    if (r.rhs.size() == top.children.size()) {
      reduce += r.prob;
      continue;
    }
    const std::string& sym = r.rhs[top.children.size()];
    auto it = std::find_if(next.begin(), next.end(), [&](const auto& p) { return p.first == sym; });
    if (it == next.end())
      next.emplace_back(sym, r.prob);
    else
      it->second += r.prob;
  }
  std::vector<ScoredAction> out;
  if (total <= 0.0) return out;
  for (const auto& [sym, p] : next)
    out.push_back({grammar_.is_nonterminal(sym) ? Action::nt(sym) : Action::gen(sym),
                   std::log2(p / total)});
  if (reduce > 0.0) out.push_back({Action::reduce(), std::log2(reduce / total)});
  return out;
}

// ---------------------------------------------------------------------------

PrefixMarginal word_sync_beam(ActionModel& model, const std::vector<std::string>& sentence,
                              const BeamOptions& opts) {
  if (sentence.empty()) throw Error(ErrorCategory::usage, "beam search: empty sentence");
  if (opts.word_beam_k < 1 || opts.action_beam_k < 1 || opts.fast_track_k < 1)
    throw Error(ErrorCategory::usage, "beam search: beam sizes must be >= 1");
  PrefixMarginal out;
  std::vector<ParserState> beam(1);
  for (std::size_t t = 0; t < sentence.size(); ++t) {
    const std::string& word = sentence[t];
    std::vector<ParserState> buffer;
    std::vector<ParserState> current = std::move(beam);
    for (std::size_t step = 0; !current.empty() && buffer.size() < opts.word_beam_k &&
                               step < opts.max_structural_per_word;
         ++step) {
      std::vector<ParserState> gens;
      std::vector<ParserState> pool;
      for (const auto& s : current)
        for (const auto& a : model.next_actions(s, word)) {
          if (a.action.kind == Action::Kind::gen) {
            if (a.action.symbol == word) gens.push_back(extend(s, a));
          } else {
            pool.push_back(extend(s, a));
          }
        }
      sort_desc(gens);
      const std::size_t fast = std::min(opts.fast_track_k, gens.size());
      std::move(gens.begin(), gens.begin() + static_cast<std::ptrdiff_t>(fast),
                std::back_inserter(buffer));
      std::move(gens.begin() + static_cast<std::ptrdiff_t>(fast), gens.end(), std::back_inserter(pool));
      sort_desc(pool);
      if (pool.size() > opts.action_beam_k) pool.resize(opts.action_beam_k);
      current.clear();
      for (auto& s : pool) {
        if (!s.history.empty() && s.history.back().kind == Action::Kind::gen)
          buffer.push_back(std::move(s));
        else
          current.push_back(std::move(s));
      }
    }
    if (buffer.empty())
      throw SearchError(t, fmt::format("beam search: no hypothesis generates word {} ('{}')", t, word));
    sort_desc(buffer);
    if (buffer.size() > opts.word_beam_k) buffer.resize(opts.word_beam_k);
    out.marginals.push_back(log2_sum(buffer));
    beam = std::move(buffer);
  }
  fill_surprisals(out);
  finish_sentence(model, beam, out);
  return out;
}

PrefixMarginal exact_marginal(ActionModel& model, const std::vector<std::string>& sentence,
                              std::size_t max_structural_per_word) {
  PrefixMarginal out;
  std::vector<ParserState> frontier(1);
  for (std::size_t t = 0; t < sentence.size(); ++t) {
    const std::string& word = sentence[t];
    std::vector<ParserState> buffer;
    std::vector<ParserState> current = std::move(frontier);
    for (std::size_t step = 0; !current.empty(); ++step) {
      if (step >= max_structural_per_word)
        throw Error(ErrorCategory::oracle_infeasible,
                    fmt::format("exact enumeration: word {} needs more than {} structural actions", t,
                                max_structural_per_word));
      std::vector<ParserState> next;
      for (const auto& s : current)
        for (const auto& a : model.next_actions(s, word)) {
          if (a.action.kind != Action::Kind::gen)
            next.push_back(extend(s, a));
          else if (a.action.symbol == word)
            buffer.push_back(extend(s, a));
        }
      current = std::move(next);
    }
    if (buffer.empty()) {
      out.marginals.resize(sentence.size(), kNegInf);
      out.sentence_logprob = kNegInf;
      fill_surprisals(out);
      return out;
    }
    out.marginals.push_back(log2_sum(buffer));
    frontier = std::move(buffer);
  }
  fill_surprisals(out);
  finish_sentence(model, frontier, out);
  return out;
}

double derivation_logprob(ActionModel& model, const std::vector<Action>& actions) {
  ParserState s;
  for (const auto& a : actions) {
    const auto scored = model.next_actions(s, std::nullopt);
    auto it = std::find_if(scored.begin(), scored.end(),
                           [&](const ScoredAction& x) { return x.action == a; });
    if (it == scored.end())
      throw SearchError(s.position, fmt::format("action {} not offered by the model", to_string(a)));
    s.apply(*it);
  }
  return s.logprob;
}

// ---------------------------------------------------------------------------

std::string encode_scorer_request(const ParserState& state, std::optional<std::string_view> next_word) {
  std::string out(next_word.value_or(""));
  out += '\t';
  for (std::size_t i = 0; i < state.history.size(); ++i) {
    if (i) out += ' ';
    out += to_string(state.history[i]);
  }
  return out;
}

std::string encode_scorer_response(const std::vector<ScoredAction>& actions) {
  std::string out;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (i) out += '\t';
    out += to_string(actions[i].action) + '\t' + format_double(actions[i].logprob);
  }
  return out;
}

std::vector<ScoredAction> decode_scorer_response(std::string_view line) {
  std::vector<ScoredAction> out;
  if (line.empty()) return out;
  const auto f = split(line, '\t');
  if (f[0] == "ERR")
    throw Error(ErrorCategory::protocol,
                fmt::format("scorer error: {}", f.size() > 1 ? f[1] : std::string_view("unknown")));
  if (f.size() % 2 != 0) throw Error(ErrorCategory::protocol, "scorer response has an odd field count");
  for (std::size_t i = 0; i < f.size(); i += 2)
    out.push_back({parse_action(f[i]), parse_double(f[i + 1], "scorer response", 1)});
  return out;
}

namespace {

bool read_line(std::FILE* in, std::string& line) {
  line.clear();
  int c;
  while ((c = std::fgetc(in)) != EOF) {
    if (c == '\n') return true;
    line += static_cast<char>(c);
  }
  return !line.empty();
}

}  // namespace

void serve_scorer(ActionModel& model, std::FILE* in, std::FILE* out) {
  std::fprintf(out, "%.*s\n", static_cast<int>(kScorerHeader.size()), kScorerHeader.data());
  std::fflush(out);
  std::string line;
  while (read_line(in, line)) {
    std::string response;
    try {
      const auto tab = line.find('\t');
      if (tab == std::string::npos) throw Error(ErrorCategory::protocol, "request without a tab");
      const std::string_view word = std::string_view(line).substr(0, tab);
      ParserState state;
      for (auto tok : split_ws(std::string_view(line).substr(tab + 1)))
        state.apply({parse_action(tok), 0.0});
      response = encode_scorer_response(
          model.next_actions(state, word.empty() ? std::nullopt : std::optional(word)));
    } catch (const std::exception& e) {
      response = std::string("ERR\t") + e.what();
    }
    std::fprintf(out, "%s\n", response.c_str());
    std::fflush(out);
  }
}

SubprocessActionModel::SubprocessActionModel(std::vector<std::string> argv) {
  if (argv.empty()) throw Error(ErrorCategory::usage, "scorer command is empty");
  int in_pipe[2];
  int out_pipe[2];
  if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0)
    throw Error(ErrorCategory::io, "cannot create scorer pipes");
  pid_ = fork();
  if (pid_ < 0) throw Error(ErrorCategory::io, "cannot fork scorer");
  if (pid_ == 0) {
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    close(in_pipe[0]);
    close(in_pipe[1]);
    close(out_pipe[0]);
    close(out_pipe[1]);
    std::vector<char*> args;
    for (auto& a : argv) args.push_back(a.data());
    args.push_back(nullptr);
    execvp(args[0], args.data());
    _exit(127);
  }
  close(in_pipe[0]);
  close(out_pipe[1]);
  to_child_ = fdopen(in_pipe[1], "w");
  from_child_ = fdopen(out_pipe[0], "r");
  std::string header;
  if (!read_line(from_child_, header) || header != kScorerHeader)
    throw Error(ErrorCategory::protocol,
                fmt::format("scorer '{}' did not send '{}'", argv[0], kScorerHeader));
}

SubprocessActionModel::~SubprocessActionModel() {
  if (to_child_) std::fclose(to_child_);
  if (from_child_) std::fclose(from_child_);
  if (pid_ > 0) waitpid(pid_, nullptr, 0);
}

std::vector<ScoredAction> SubprocessActionModel::next_actions(const ParserState& state,
                                                              std::optional<std::string_view> next_word) {
  const std::string request = encode_scorer_request(state, next_word);
  std::fprintf(to_child_, "%s\n", request.c_str());
  std::fflush(to_child_);
  std::string line;
  if (!read_line(from_child_, line) && std::feof(from_child_))
    throw Error(ErrorCategory::protocol, "scorer closed its output");
  return decode_scorer_response(line);
}

}  // namespace synprobe
