#include "synprobe/tree.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "synprobe/error.hpp"

namespace synprobe {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  std::vector<Tree> read_all() {
    std::vector<Tree> trees;
    skip_space();
    while (pos_ < text_.size()) {
      if (text_[pos_] != '(') throw ParseError(pos_, "expected '(' at start of tree");
      const std::size_t open = pos_;
      Tree t = read_node(/*top_level=*/true);
      if (t.label.empty()) {
        // `( (S ...) )`: unwrap the unlabeled root.
        if (t.children.size() != 1 || t.is_preterminal())
          throw ParseError(open, "empty node label");
        Tree inner = std::move(t.children.front());
        t = std::move(inner);
      }
      trees.push_back(std::move(t));
      skip_space();
    }
    return trees;
  }

 private:
  void skip_space() {
    while (pos_ < text_.size() && is_space(text_[pos_])) ++pos_;
  }

  std::string_view read_atom() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && !is_space(text_[pos_]) && text_[pos_] != '(' &&
           text_[pos_] != ')')
      ++pos_;
    return text_.substr(start, pos_ - start);
  }

  // Precondition: text_[pos_] == '('.
  Tree read_node(bool top_level) {
    const std::size_t open = pos_;
    ++pos_;
    skip_space();
    Tree node;
    if (pos_ >= text_.size()) throw ParseError(open, "unclosed parenthesis");
    if (text_[pos_] != '(' && text_[pos_] != ')') node.label = std::string(read_atom());
    if (node.label.empty() && !top_level) throw ParseError(open, "empty node label");

    bool saw_atom = false;
    for (;;) {
      skip_space();
      if (pos_ >= text_.size()) throw ParseError(open, "unclosed parenthesis");
      const char c = text_[pos_];
      if (c == ')') {
        ++pos_;
        break;
      }
      if (c == '(') {
        if (saw_atom) throw ParseError(pos_, "token mixed with subtrees");
        node.children.push_back(read_node(false));
        continue;
      }
      const std::size_t atom_pos = pos_;
      std::string_view atom = read_atom();
      if (saw_atom) throw ParseError(atom_pos, "preterminal with more than one token");
      if (!node.children.empty()) throw ParseError(atom_pos, "token mixed with subtrees");
      node.word = std::string(atom);
      saw_atom = true;
    }
    if (!saw_atom && node.children.empty()) throw ParseError(open, "empty node");
    if (saw_atom && node.label.empty()) throw ParseError(open, "empty node label");
    return node;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

void collect(const Tree& t, std::vector<Terminal>& out) {
  if (t.is_preterminal()) {
    out.push_back({t.word, t.label});
    return;
  }
  for (const auto& c : t.children) collect(c, out);
}

void render(const Tree& t, std::string& out) {
  out += '(';
  out += t.label;
  if (t.is_preterminal()) {
    out += ' ';
    out += t.word;
  } else {
    for (const auto& c : t.children) {
      out += ' ';
      render(c, out);
    }
  }
  out += ')';
}

}  // namespace

std::vector<Terminal> Tree::terminals() const {
  std::vector<Terminal> out;
  collect(*this, out);
  return out;
}

std::size_t Tree::terminal_count() const noexcept {
  if (is_preterminal()) return 1;
  std::size_t n = 0;
  for (const auto& c : children) n += c.terminal_count();
  return n;
}

std::vector<Tree> parse_treebank(std::string_view text) { return Reader(text).read_all(); }

std::string to_string(const Tree& tree) {
  std::string out;
  render(tree, out);
  return out;
}

std::string_view base_label(std::string_view label) noexcept {
  if (label.empty() || label.front() == '-') return label;
  const auto cut = label.find_first_of("-=|");
  return cut == std::string_view::npos ? label : label.substr(0, cut);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCategory::io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<Tree> read_treebank_files(const std::vector<std::string>& paths) {
  std::vector<Tree> trees;
  for (const auto& p : paths) {
    try {
      auto part = parse_treebank(read_file(p));
      trees.insert(trees.end(), std::make_move_iterator(part.begin()),
                   std::make_move_iterator(part.end()));
    } catch (const ParseError& e) {
      throw Error(ErrorCategory::parse, p + ": " + e.what());
    }
  }
  return trees;
}

}  // namespace synprobe
