#pragma once

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "synprobe/beam.hpp"

namespace testing {

namespace fs = std::filesystem;

inline std::string data_path(const std::string& name) { return std::string(SYNPROBE_DATA_DIR) + "/" + name; }
inline std::string fixture_path(const std::string& name) {
  return std::string(SYNPROBE_FIXTURE_DIR) + "/" + name;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("synprobe-" + tag + "-" + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const noexcept { return path_; }
  std::string str(const std::string& sub = "") const { return sub.empty() ? path_.string() : (path_ / sub).string(); }

 private:
  fs::path path_;
};

inline std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CommandResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr
};

inline CommandResult run(const std::string& command) {
  CommandResult r;
  std::FILE* p = ::popen((command + " 2>&1").c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) r.output.append(buf, n);
  const int status = ::pclose(p);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

// Acyclic grammar: N<i> only rewrites to terminals and N<j>, j > i, so every
// sentence has finitely many derivations. Several rules share yields, which
// keeps the prefix marginals ambiguous.
inline synprobe::ToyPCFG random_pcfg(std::mt19937_64& rng, int nonterminals = 4) {
  const std::vector<std::string> terminals{"a", "b", "c"};
  std::vector<synprobe::Rule> rules;
  for (int i = 0; i < nonterminals; ++i) {
    const std::string lhs = "N" + std::to_string(i);
    const int n_rules = 1 + static_cast<int>(rng() % 3);
    std::vector<std::vector<std::string>> seen;
    std::vector<double> weights;
    for (int r = 0; r < n_rules; ++r) {
      std::vector<std::string> rhs;
      const int len = 1 + static_cast<int>(rng() % (i + 1 < nonterminals ? 3 : 2));
      for (int s = 0; s < len; ++s) {
        const int later = nonterminals - i - 1;
        if (later > 0 && rng() % 2 == 0)
          rhs.push_back("N" + std::to_string(i + 1 + static_cast<int>(rng() % later)));
        else
          rhs.push_back(terminals[rng() % terminals.size()]);
      }
      bool dup = false;
      for (const auto& s : seen) dup = dup || s == rhs;
      if (dup) continue;
      seen.push_back(rhs);
      weights.push_back(0.2 + static_cast<double>(rng() % 1000) / 1000.0);
      rules.push_back({lhs, rhs, 0.0});
    }
    double total = 0.0;
    for (double w : weights) total += w;
    std::size_t k = rules.size() - weights.size();
    for (double w : weights) rules[k++].prob = w / total;
  }
  return synprobe::ToyPCFG(std::move(rules));
}

inline void sample_yield(const synprobe::ToyPCFG& g, const std::string& sym, std::mt19937_64& rng,
                         std::vector<std::string>& out) {
  if (!g.is_nonterminal(sym)) {
    out.push_back(sym);
    return;
  }
  const auto idx = g.rules_for(sym);
  double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  std::size_t pick = idx.back();
  for (auto i : idx) {
    if (u < g.rules()[i].prob) {
      pick = i;
      break;
    }
    u -= g.rules()[i].prob;
  }
  for (const auto& s : g.rules()[pick].rhs) sample_yield(g, s, rng, out);
}

inline std::vector<std::string> sample_sentence(const synprobe::ToyPCFG& g, std::mt19937_64& rng) {
  std::vector<std::string> out;
  sample_yield(g, g.start(), rng, out);
  return out;
}

}  // namespace testing
