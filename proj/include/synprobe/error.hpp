#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace synprobe {

// Stable tokens; the CLI prints them on stderr and maps them to exit codes.
enum class ErrorCategory {
  usage,
  io,
  parse,
  format,
  undefined_input,
  training,
  generation,
  alignment,
  duplicate_id,
  unknown_id,
  incomplete,
  search,
  oracle_infeasible,
  numeric,
  separation,
  rank,
  protocol,
};

std::string_view category_token(ErrorCategory c) noexcept;
int exit_code(ErrorCategory c) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t offset, const std::string& what)
      : Error(ErrorCategory::parse, what + " at offset " + std::to_string(offset)),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class AlignmentError : public Error {
 public:
  AlignmentError(std::string sentence_id, std::size_t index, const std::string& what)
      : Error(ErrorCategory::alignment, what),
        sentence_id_(std::move(sentence_id)),
        index_(index) {}

  const std::string& sentence_id() const noexcept { return sentence_id_; }
  std::size_t index() const noexcept { return index_; }

 private:
  std::string sentence_id_;
  std::size_t index_;
};

class SearchError : public Error {
 public:
  SearchError(std::size_t word_index, const std::string& what)
      : Error(ErrorCategory::search, what), word_index_(word_index) {}

  std::size_t word_index() const noexcept { return word_index_; }

 private:
  std::size_t word_index_;
};

}  // namespace synprobe
