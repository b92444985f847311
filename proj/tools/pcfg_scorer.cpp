// Serves a PCFG action model over the scorer protocol on stdin/stdout.
#include <cstdio>
#include <iostream>

#include "synprobe/beam.hpp"
#include "synprobe/error.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: pcfg_scorer GRAMMAR\n";
    return 2;
  }
  try {
    synprobe::PcfgActionModel model(synprobe::ToyPCFG::read_file(argv[1]));
    synprobe::serve_scorer(model, stdin, stdout);
  } catch (const synprobe::Error& e) {
    std::cerr << "error[" << synprobe::category_token(e.category()) << "]: " << e.what() << '\n';
    return synprobe::exit_code(e.category());
  }
  return 0;
}
