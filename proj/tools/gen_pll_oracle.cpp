// Regenerates data/pll_oracle.json from the fixed generator seed.
#include "varopt/error.hpp"
#include "varopt/json_io.hpp"
#include "varopt/oracle.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Write the synthetic PLL oracle coefficients"};
  std::string out = "pll_oracle.json";
  std::uint64_t seed = varopt::kPllOracleSeed;
  app.add_option("--out", out, "output path");
  app.add_option("--seed", seed, "generator seed");
  CLI11_PARSE(app, argc, argv);
  try {
    varopt::write_json_file(out, varopt::oracle_to_json(varopt::generate_pll_oracle(seed)));
  } catch (const varopt::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
