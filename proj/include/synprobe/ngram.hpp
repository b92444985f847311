#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "synprobe/surprisal.hpp"

namespace synprobe {

using WordId = std::uint32_t;

class Vocabulary {
 public:
  static constexpr WordId kBos = 0;
  static constexpr WordId kEos = 1;
  static constexpr WordId kUnk = 2;
  static constexpr std::string_view kBosToken = "<s>";
  static constexpr std::string_view kEosToken = "</s>";
  static constexpr std::string_view kUnkToken = "<unk>";

  Vocabulary();

  WordId add(std::string_view word);
  WordId id(std::string_view word) const noexcept;  // kUnk when unseen
  const std::string& word(WordId id) const { return words_.at(id); }
  std::size_t size() const noexcept { return words_.size(); }

 private:
  std::unordered_map<std::string, WordId> ids_;
  std::vector<std::string> words_;
};

struct NGramOptions {
  int order = 5;
  // Map training singletons to <unk>.
  bool unk_singletons = false;
};

/// Interpolated modified Kneser-Ney n-gram model. Sentences are padded with
/// order-1 start symbols and one end symbol. The highest order uses raw
/// counts, lower orders use continuation counts N1+(. h w), and the unigram
/// level interpolates with the uniform distribution over the vocabulary
/// (every type plus </s> and <unk>). An order-1 model is the maximum
/// likelihood unigram over training tokens.
class NGramModel {
 public:
  static NGramModel train(std::span<const std::vector<std::string>> sentences,
                          const NGramOptions& options = {});

  int order() const noexcept { return order_; }
  const Vocabulary& vocabulary() const noexcept { return vocab_; }
  // discounts()[k-1] = {D1, D2, D3+} for n-grams of length k.
  const std::vector<std::array<double, 3>>& discounts() const noexcept { return discounts_; }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

  /// log2 p(word | context). Contexts longer than order-1 are truncated from
  /// the left; pass "<s>" tokens explicitly for sentence-initial contexts.
  double logprob(std::span<const std::string> context, std::string_view word) const;

  /// Surprisals (bits) of each token given its padded history. The end
  /// symbol is scored only when `include_end` is set.
  std::vector<double> surprisals(std::span<const std::string> tokens, bool include_end = false) const;

  /// log2 p(tokens, </s>) (order >= 2), log2 p(tokens) for order 1.
  double sentence_logprob(std::span<const std::string> tokens) const;

  /// Per-token surprisals for each sentence; boundary symbols are not emitted.
  SurprisalTable score_sentences(std::span<const std::vector<std::string>> sentences,
                                 std::span<const std::string> ids = {}, unsigned jobs = 1) const;

  /// 2^(mean per-token surprisal) over held-out tokens.
  double perplexity(std::span<const std::vector<std::string>> held_out) const;

  std::uint64_t raw_count(std::span<const std::string> ngram) const;
  std::uint64_t continuation_count(std::span<const std::string> ngram) const;

  /// Sorted textual table of n-gram counts and discounts.
  std::string serialize() const;
  static NGramModel deserialize(std::string_view text);

 private:
  using Key = std::u32string;
  struct Counts {
    std::int64_t raw = 0;
    std::int64_t cont = 0;
  };
  struct ContextStats {
    std::int64_t total = 0;
    std::int64_t n1 = 0;
    std::int64_t n2 = 0;
    std::int64_t n3 = 0;
  };

  void finalize(bool recompute_discounts);
  std::int64_t level_count(int k, const Counts& c) const noexcept {
    return k == order_ ? c.raw : c.cont;
  }
  double discount(int k, std::int64_t c) const noexcept;
  double prob_ids(const WordId* context, std::size_t context_len, WordId w) const;
  Key key_of(std::span<const std::string> tokens) const;

  int order_ = 5;
  Vocabulary vocab_;
  std::int64_t unigram_tokens_ = 0;  // order-1 normalizer
  std::vector<std::unordered_map<Key, Counts>> ngrams_;       // [k-1]
  std::vector<std::unordered_map<Key, ContextStats>> contexts_;  // [k-1], context of length k-1
  std::vector<std::array<double, 3>> discounts_;
  std::vector<std::string> warnings_;
};

}  // namespace synprobe
