#include "synprobe/ngram.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <thread>

#include <fmt/format.h>

#include "synprobe/error.hpp"
#include "synprobe/text.hpp"

namespace synprobe {

Vocabulary::Vocabulary() {
  add(kBosToken);
  add(kEosToken);
  add(kUnkToken);
}

WordId Vocabulary::add(std::string_view word) {
  auto [it, inserted] = ids_.try_emplace(std::string(word), static_cast<WordId>(words_.size()));
  if (inserted) words_.emplace_back(word);
  return it->second;
}

WordId Vocabulary::id(std::string_view word) const noexcept {
  auto it = ids_.find(std::string(word));
  return it == ids_.end() ? kUnk : it->second;
}

NGramModel NGramModel::train(std::span<const std::vector<std::string>> sentences,
                             const NGramOptions& options) {
  if (options.order < 1) throw Error(ErrorCategory::training, "ngram: order must be >= 1");
  std::size_t tokens = 0;
  for (const auto& s : sentences) tokens += s.size();
  if (sentences.empty() || tokens == 0)
    throw Error(ErrorCategory::training, "ngram: empty training corpus");

  NGramModel m;
  m.order_ = options.order;
  const int n = m.order_;

  std::map<std::string, std::int64_t> freq;
  for (const auto& s : sentences)
    for (const auto& w : s) ++freq[w];
  for (const auto& [w, c] : freq) {
    if (w == Vocabulary::kBosToken || w == Vocabulary::kEosToken)
      throw Error(ErrorCategory::training, fmt::format("ngram: reserved token '{}' in corpus", w));
    if (!(options.unk_singletons && c == 1)) m.vocab_.add(w);
  }

  m.ngrams_.assign(static_cast<std::size_t>(n), {});
  std::vector<WordId> ids;
  for (const auto& s : sentences) {
    if (n == 1) {
      for (const auto& w : s) {
        ++m.ngrams_[0][Key(1, m.vocab_.id(w))].raw;
        ++m.unigram_tokens_;
      }
      continue;
    }
    ids.assign(static_cast<std::size_t>(n - 1), Vocabulary::kBos);
    for (const auto& w : s) ids.push_back(m.vocab_.id(w));
    ids.push_back(Vocabulary::kEos);
    for (std::size_t i = static_cast<std::size_t>(n - 1); i < ids.size(); ++i)
      for (int k = 1; k <= n; ++k) {
        Key key(ids.begin() + static_cast<std::ptrdiff_t>(i) - (k - 1),
                ids.begin() + static_cast<std::ptrdiff_t>(i) + 1);
        ++m.ngrams_[static_cast<std::size_t>(k - 1)][key].raw;
      }
  }
  m.finalize(true);
  return m;
}

void NGramModel::finalize(bool /*recompute_discounts*/) {
  const int n = order_;
  warnings_.clear();
  if (n == 1) {
    unigram_tokens_ = 0;
    for (const auto& [k, c] : ngrams_[0]) unigram_tokens_ += c.raw;
    discounts_.assign(1, {0.0, 0.0, 0.0});
    contexts_.assign(1, {});
    return;
  }
  // Continuation counts: each (k+1)-gram type (v h w) contributes 1 to (h w).
  for (int k = 1; k < n; ++k) {
    auto& lower = ngrams_[static_cast<std::size_t>(k - 1)];
    for (auto& [key, c] : lower) c.cont = 0;
    for (const auto& [key, c] : ngrams_[static_cast<std::size_t>(k)])
      if (c.raw > 0) ++lower[key.substr(1)].cont;
  }
  contexts_.assign(static_cast<std::size_t>(n), {});
  discounts_.assign(static_cast<std::size_t>(n), {});
  for (int k = 1; k <= n; ++k) {
    std::array<std::int64_t, 5> coc{};
    auto& ctx = contexts_[static_cast<std::size_t>(k - 1)];
    for (const auto& [key, c] : ngrams_[static_cast<std::size_t>(k - 1)]) {
      const std::int64_t v = level_count(k, c);
      if (v <= 0) continue;
      if (v <= 4) ++coc[static_cast<std::size_t>(v)];
      ContextStats& cs = ctx[key.substr(0, key.size() - 1)];
      cs.total += v;
      ++(v == 1 ? cs.n1 : v == 2 ? cs.n2 : cs.n3);
    }
    auto& d = discounts_[static_cast<std::size_t>(k - 1)];
    if (coc[1] == 0 || coc[2] == 0) {
      d = {0.5, 0.5, 0.5};
      warnings_.push_back(fmt::format(
          "order {}: count-of-counts n1={} n2={}; using absolute discount 0.5", k, coc[1], coc[2]));
      continue;
    }
    const double y = static_cast<double>(coc[1]) / static_cast<double>(coc[1] + 2 * coc[2]);
    for (int j = 1; j <= 3; ++j) {
      double dj = 1.0;
      if (coc[static_cast<std::size_t>(j)] > 0)
        dj = j - (j + 1) * y * static_cast<double>(coc[static_cast<std::size_t>(j + 1)]) /
                     static_cast<double>(coc[static_cast<std::size_t>(j)]);
      if (dj <= 0.0) {
        warnings_.push_back(fmt::format("order {}: D{} = {} is not positive; using 0.5", k, j, format_double(dj)));
        dj = 0.5;
      }
      d[static_cast<std::size_t>(j - 1)] = std::min(dj, 1.0);
    }
  }
}

double NGramModel::discount(int k, std::int64_t c) const noexcept {
  if (c <= 0) return 0.0;
  const auto& d = discounts_[static_cast<std::size_t>(k - 1)];
  return d[static_cast<std::size_t>(std::min<std::int64_t>(c, 3) - 1)];
}

double NGramModel::prob_ids(const WordId* context, std::size_t context_len, WordId w) const {
  if (order_ == 1) {
    auto it = ngrams_[0].find(Key(1, w));
    if (it == ngrams_[0].end() || unigram_tokens_ == 0) return 0.0;
    return static_cast<double>(it->second.raw) / static_cast<double>(unigram_tokens_);
  }
  const double vocab_size = static_cast<double>(vocab_.size() - 1);  // <s> is never predicted
  double p = 0.0;
  {
    const ContextStats& cs = contexts_[0].at(Key());
    auto it = ngrams_[0].find(Key(1, w));
    const std::int64_t c = it == ngrams_[0].end() ? 0 : level_count(1, it->second);
    const double total = static_cast<double>(cs.total);
    const double gamma = (discount(1, 1) * static_cast<double>(cs.n1) +
                          discount(1, 2) * static_cast<double>(cs.n2) +
                          discount(1, 3) * static_cast<double>(cs.n3)) /
                         total;
    p = std::max(static_cast<double>(c) - discount(1, c), 0.0) / total + gamma / vocab_size;
  }
  const std::size_t max_k = std::min<std::size_t>(static_cast<std::size_t>(order_), context_len + 1);
  Key hw;
  for (std::size_t k = 2; k <= max_k; ++k) {
    const Key h(context + (context_len - (k - 1)), context + context_len);
    auto cit = contexts_[k - 1].find(h);
    if (cit == contexts_[k - 1].end() || cit->second.total == 0) break;
    const ContextStats& cs = cit->second;
    hw = h;
    hw.push_back(w);
    auto it = ngrams_[k - 1].find(hw);
    const int level = static_cast<int>(k);
    const std::int64_t c = it == ngrams_[k - 1].end() ? 0 : level_count(level, it->second);
    const double total = static_cast<double>(cs.total);
    const double gamma = (discount(level, 1) * static_cast<double>(cs.n1) +
                          discount(level, 2) * static_cast<double>(cs.n2) +
                          discount(level, 3) * static_cast<double>(cs.n3)) /
                         total;
    p = std::max(static_cast<double>(c) - discount(level, c), 0.0) / total + gamma * p;
  }
  return p;
}

double NGramModel::logprob(std::span<const std::string> context, std::string_view word) const {
  std::vector<WordId> ctx;
  const std::size_t keep =
      std::min<std::size_t>(context.size(), static_cast<std::size_t>(std::max(order_ - 1, 0)));
  for (std::size_t i = context.size() - keep; i < context.size(); ++i)
    ctx.push_back(vocab_.id(context[i]));
  return std::log2(prob_ids(ctx.data(), ctx.size(), vocab_.id(word)));
}

std::vector<double> NGramModel::surprisals(std::span<const std::string> tokens,
                                           bool include_end) const {
  std::vector<double> out;
  out.reserve(tokens.size() + 1);
  const std::size_t hist = static_cast<std::size_t>(order_ - 1);
  std::vector<WordId> ids(hist, Vocabulary::kBos);
  auto score = [&](WordId w) {
    const double p = prob_ids(ids.data() + (ids.size() - hist), hist, w);
    out.push_back(p > 0.0 ? -std::log2(p) : std::numeric_limits<double>::infinity());
    ids.push_back(w);
  };
  for (const auto& t : tokens) score(vocab_.id(t));
  if (include_end && order_ > 1) score(Vocabulary::kEos);
  return out;
}

double NGramModel::sentence_logprob(std::span<const std::string> tokens) const {
  double total = 0.0;
  for (double s : surprisals(tokens, true)) total -= s;
  return total;
}

SurprisalTable NGramModel::score_sentences(std::span<const std::vector<std::string>> sentences,
                                           std::span<const std::string> ids, unsigned jobs) const {
  if (!ids.empty() && ids.size() != sentences.size())
    throw Error(ErrorCategory::usage, "score_sentences: ids and sentences differ in length");
  SurprisalTable table(sentences.size());
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      auto& r = table[i];
      r.sentence_id = ids.empty() ? std::to_string(i) : ids[i];
      r.tokens = sentences[i];
      r.surprisals = surprisals(sentences[i]);
    }
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(sentences.size())));
  if (jobs <= 1) {
    work(0, sentences.size());
    return table;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (sentences.size() + jobs - 1) / jobs;
  for (unsigned j = 0; j < jobs; ++j) {
    const std::size_t b = j * chunk;
    const std::size_t e = std::min(sentences.size(), b + chunk);
    if (b < e) pool.emplace_back(work, b, e);
  }
  for (auto& t : pool) t.join();
  return table;
}

double NGramModel::perplexity(std::span<const std::vector<std::string>> held_out) const {
  return synprobe::perplexity(score_sentences(held_out));
}

NGramModel::Key NGramModel::key_of(std::span<const std::string> tokens) const {
  Key k;
  for (const auto& t : tokens) k.push_back(vocab_.id(t));
  return k;
}

std::uint64_t NGramModel::raw_count(std::span<const std::string> ngram) const {
  if (ngram.empty() || ngram.size() > ngrams_.size()) return 0;
  auto it = ngrams_[ngram.size() - 1].find(key_of(ngram));
  return it == ngrams_[ngram.size() - 1].end() ? 0 : static_cast<std::uint64_t>(it->second.raw);
}

std::uint64_t NGramModel::continuation_count(std::span<const std::string> ngram) const {
  if (ngram.empty() || ngram.size() > ngrams_.size()) return 0;
  auto it = ngrams_[ngram.size() - 1].find(key_of(ngram));
  return it == ngrams_[ngram.size() - 1].end() ? 0 : static_cast<std::uint64_t>(it->second.cont);
}

std::string NGramModel::serialize() const {
  std::string out = "#synprobe-ngram v1\n";
  out += fmt::format("order\t{}\n", order_);
  for (std::size_t k = 0; k < discounts_.size(); ++k)
    out += fmt::format("discount\t{}\t{}\t{}\t{}\n", k + 1, format_double(discounts_[k][0]),
                       format_double(discounts_[k][1]), format_double(discounts_[k][2]));
  for (std::size_t k = 0; k < ngrams_.size(); ++k) {
    std::vector<std::pair<std::string, const Counts*>> rows;
    rows.reserve(ngrams_[k].size());
    for (const auto& [key, c] : ngrams_[k]) {
      if (c.raw == 0) continue;
      std::string words;
      for (std::size_t i = 0; i < key.size(); ++i) {
        if (i) words += ' ';
        words += vocab_.word(key[i]);
      }
      rows.emplace_back(std::move(words), &c);
    }
    std::sort(rows.begin(), rows.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [words, c] : rows)
      out += fmt::format("ngram\t{}\t{}\t{}\n", k + 1, words, c->raw);
  }
  return out;
}

NGramModel NGramModel::deserialize(std::string_view text) {
  const auto lines = split_lines(text);
  if (lines.empty() || lines.front() != "#synprobe-ngram v1")
    throw Error(ErrorCategory::format, "ngram model: missing '#synprobe-ngram v1' header");
  NGramModel m;
  bool have_order = false;
  struct Row {
    std::size_t k;
    std::vector<std::string_view> words;
    std::int64_t raw;
  };
  std::vector<Row> rows;
  std::set<std::string_view> words;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    if (lines[ln].empty()) continue;
    auto f = split(lines[ln], '\t');
    if (f[0] == "order" && f.size() == 2) {
      m.order_ = static_cast<int>(parse_int(f[1], "ngram model", ln + 1));
      have_order = true;
    } else if (f[0] == "discount" && f.size() == 5) {
      // recomputed from the counts
    } else if (f[0] == "ngram" && f.size() == 4) {
      Row r{static_cast<std::size_t>(parse_int(f[1], "ngram model", ln + 1)), split_ws(f[2]),
            parse_int(f[3], "ngram model", ln + 1)};
      if (r.k == 0 || r.words.size() != r.k)
        throw Error(ErrorCategory::format, fmt::format("ngram model line {}: bad n-gram", ln + 1));
      if (r.k == 1) words.insert(r.words.front());
      rows.push_back(std::move(r));
    } else {
      throw Error(ErrorCategory::format, fmt::format("ngram model line {}: unrecognized", ln + 1));
    }
  }
  if (!have_order || m.order_ < 1) throw Error(ErrorCategory::format, "ngram model: missing order");
  for (auto w : words) m.vocab_.add(w);
  m.ngrams_.assign(static_cast<std::size_t>(m.order_), {});
  for (const auto& r : rows) {
    if (r.k > static_cast<std::size_t>(m.order_))
      throw Error(ErrorCategory::format, "ngram model: n-gram longer than model order");
    Key key;
    for (auto w : r.words) key.push_back(m.vocab_.id(w));
    m.ngrams_[r.k - 1][key].raw = r.raw;
  }
  m.finalize(true);
  return m;
}

}  // namespace synprobe
