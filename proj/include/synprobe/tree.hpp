#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace synprobe {

struct Terminal {
  std::string word;
  std::string tag;

  friend bool operator==(const Terminal&, const Terminal&) = default;
};

/// A bracketed constituency parse. A node without children is a preterminal:
/// its label is the POS tag and `word` holds the token.
struct Tree {
  std::string label;
  std::vector<Tree> children;
  std::string word;

  bool is_preterminal() const noexcept { return children.empty(); }

  std::vector<Terminal> terminals() const;
  std::size_t terminal_count() const noexcept;

  friend bool operator==(const Tree&, const Tree&) = default;
};

/// Parses a sequence of top-level S-expressions such as
/// `(S (NP (DT The) (NN president)) (VP (VBZ is)))`.
///
/// The PTB convention of an unlabeled outer wrapper, `( (S ...) )`, is
/// accepted and unwrapped. Any other empty label, an empty node, or a bare
/// token next to subtrees is rejected. Throws ParseError carrying the byte
/// offset of the offending character (for an unclosed node, its opening
/// parenthesis).
std::vector<Tree> parse_treebank(std::string_view text);

/// Canonical one-line rendering; parse_treebank(to_string(t)) == {t}.
std::string to_string(const Tree& tree);

// Strip PTB function tags and indices: NP-SBJ-1 -> NP. Labels starting with
// '-' (e.g. -NONE-, -LRB-) are returned unchanged.
std::string_view base_label(std::string_view label) noexcept;

std::string read_file(const std::string& path);
std::vector<Tree> read_treebank_files(const std::vector<std::string>& paths);

}  // namespace synprobe
