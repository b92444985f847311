#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "synprobe/stats.hpp"
#include "synprobe/suite.hpp"
#include "synprobe/surprisal.hpp"

namespace synprobe {

/// Summed surprisal over the sentence's region. Throws AlignmentError at the
/// first index where the record's tokens diverge from the sentence.
double region_surprisal(const Sentence& sentence, const SurprisalRecord& record);

/// 1 iff gram_bits < ungram_bits - epsilon_tie; ties count as failures.
/// Non-finite input is an Error(numeric).
int item_accuracy(double gram_bits, double ungram_bits, double epsilon_tie = 1e-9);

struct AlignedItem {
  const TestItem* item;
  const SurprisalRecord* grammatical;
  const SurprisalRecord* ungrammatical;
};

/// Joins records to suite sentences by sentence_id (`<item_id>.grammatical`,
/// `<item_id>.ungrammatical`). Errors: duplicate_id, unknown_id, alignment
/// (token mismatch), incomplete (sentences without a record).
std::vector<AlignedItem> align(const TestSuite& suite, const SurprisalTable& records);

struct ItemResult {
  std::string item_id;
  std::string target;
  Category category = Category::singular;
  int bucket = 0;
  std::int64_t exposure = 0;
  int frame = 0;
  double grammatical_bits = 0.0;
  double ungrammatical_bits = 0.0;
  int correct = 0;
};

std::vector<ItemResult> score_items(const TestSuite& suite, const SurprisalTable& records,
                                    double epsilon_tie = 1e-9);

struct EvalRow {
  std::string suite;
  std::string model;
  std::string bucket;    // bucket id or "all"
  std::string category;  // category or "all"
  BinomialSummary summary;
};

struct EvalResult {
  std::vector<EvalRow> rows;
  std::vector<ItemResult> items;
};

/// Per bucket and category, per bucket pooled, and pooled over buckets.
/// Every suite item needs a result; missing ones raise Error(incomplete).
EvalResult aggregate(const TestSuite& suite, std::vector<ItemResult> items, std::string_view model,
                     double level = 0.95);

inline constexpr std::string_view kEvalHeader =
    "suite,model,bucket,category,n,k,accuracy,ci_lo,ci_hi,p_above_chance";
inline constexpr std::string_view kItemsHeader =
    "suite,model,item_id,target,category,bucket,exposure,frame,grammatical_bits,ungrammatical_bits,correct";

std::string write_eval_csv(const EvalResult& result);
std::string write_items_csv(const EvalResult& result);
std::vector<EvalRow> read_eval_csv(std::string_view text);

struct ItemRow {
  std::string suite;
  std::string model;
  ItemResult result;
};
std::vector<ItemRow> read_items_csv(std::string_view text);

}  // namespace synprobe
