// Writes a small procedural leaf corpus: PNG images, terminal sidecars and
// train.csv / test.csv manifests usable with `leafid train` and
// `leafid evaluate`.
//
//   make_synthetic_corpus <out-dir> [train-per-class] [test-per-class] [seed]

#include <cstdlib>
#include <iostream>
#include <string>

#include "leafid/synthetic.hpp"

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: " << argv[0] << " <out-dir> [train-per-class] [test-per-class] [seed]\n";
    return 2;
  }
  try {
    const int n_train = argc > 2 ? std::stoi(argv[2]) : 30;
    const int n_test = argc > 3 ? std::stoi(argv[3]) : 10;
    const unsigned long seed = argc > 4 ? std::stoul(argv[4]) : 7;
    const auto files = leafid::synthetic::write_corpus(argv[1], n_train, n_test, seed);
    std::cout << "wrote " << files.train_manifest.string() << " and " << files.test_manifest.string() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
