// Writes the synthetic logistic-regression design shipped in data/.
//
//   make_logistic_data <out.csv> [n_obs=270] [m=14] [seed=20220101]

#include <cstdlib>
#include <iostream>
#include <string>

#include "geomc/targets.hpp"

int main(int argc, char** argv) {
  if (argc < 2 || argc > 5) {
    std::cerr << "usage: " << argv[0] << " <out.csv> [n_obs] [m] [seed]\n";
    return 2;
  }
  const int n_obs = argc > 2 ? std::atoi(argv[2]) : 270;
  const int m = argc > 3 ? std::atoi(argv[3]) : 14;
  const std::uint64_t seed = argc > 4 ? std::strtoull(argv[4], nullptr, 10) : 20220101ull;
  try {
    geomc::write_design_csv(argv[1], geomc::synthesize_logistic_data(n_obs, m, seed));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
